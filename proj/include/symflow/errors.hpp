#pragma once

#include <stdexcept>
#include <string>

namespace symflow {

// Error taxonomy shared by the CLI exit-code mapping:
//   domain/regularity problems -> exit 2, numerical-resolution problems -> exit 3.
enum class ErrorKind {
    validation,
    regularity,
    degenerate_endpoint,
    precondition,
    hypothesis,
    data,
    resolution,
    integration,
    search,
    count_unreliable,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

    // 2 = domain/regularity, 3 = numerical resolution, 1 = I/O.
    int exit_code() const {
        switch (kind_) {
            case ErrorKind::resolution:
            case ErrorKind::integration:
            case ErrorKind::search:
            case ErrorKind::count_unreliable:
                return 3;
            case ErrorKind::io:
                return 1;
            default:
                return 2;
        }
    }

private:
    ErrorKind kind_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error(ErrorKind::validation, w) {}
};
struct RegularityError : Error {
    explicit RegularityError(const std::string& w) : Error(ErrorKind::regularity, w) {}
};
struct DegenerateEndpointError : Error {
    explicit DegenerateEndpointError(const std::string& w) : Error(ErrorKind::degenerate_endpoint, w) {}
};
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& w) : Error(ErrorKind::precondition, w) {}
};
struct HypothesisError : Error {
    explicit HypothesisError(const std::string& w) : Error(ErrorKind::hypothesis, w) {}
};
struct DataError : Error {
    explicit DataError(const std::string& w) : Error(ErrorKind::data, w) {}
};
struct ResolutionError : Error {
    explicit ResolutionError(const std::string& w) : Error(ErrorKind::resolution, w) {}
};
struct IntegrationError : Error {
    explicit IntegrationError(const std::string& w) : Error(ErrorKind::integration, w) {}
};
struct SearchError : Error {
    explicit SearchError(const std::string& w) : Error(ErrorKind::search, w) {}
};
struct CountUnreliableError : Error {
    explicit CountUnreliableError(const std::string& w) : Error(ErrorKind::count_unreliable, w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

}  // namespace symflow
