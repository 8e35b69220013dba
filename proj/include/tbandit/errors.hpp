// errors.hpp
#pragma once
#include <stdexcept>
#include <string>

namespace tbandit {

// Value outside the mathematical domain of an operation (reward not in
// [0,1], epsilon not in (0,1), inadmissible variance, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Caller broke an operation's precondition (e.g. sigma_hat on an arm with
// no observations).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Event sequence that cannot happen under the pull/observe protocol, such as
// a reward arriving for an arm with no pending pull.
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Invalid experiment, policy or episode configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace tbandit
