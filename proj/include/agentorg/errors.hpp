#pragma once

#include <stdexcept>
#include <string>

namespace agentorg {

// Invalid campaign / run configuration (CLI exit code 1).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An operation was called outside its documented precondition.
class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A metric is not defined for the given input (single-task RSI, n < 2 spectral gap, ...).
class undefined_metric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class empty_series : public std::invalid_argument {
public:
    explicit empty_series(const std::string& what = "empty series") : std::invalid_argument(what) {}
};

class unjudged_record : public std::invalid_argument {
public:
    explicit unjudged_record(const std::string& run_id)
        : std::invalid_argument("unjudged record: " + run_id), run_id_(run_id) {}
    const std::string& run_id() const noexcept { return run_id_; }

private:
    std::string run_id_;
};

// Cohen's d with zero pooled spread but different means.
class infinite_effect : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace agentorg
