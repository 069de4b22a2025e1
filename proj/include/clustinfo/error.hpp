#pragma once

#include <stdexcept>
#include <string>

namespace clustinfo {

/// Coarse error category; the CLI maps each to a distinct exit code.
enum class ErrorClass {
    Config,   // bad invocation, missing files, out-of-range parameters
    Data,     // malformed or degenerate input data
    Compute,  // numerical failure or infeasible computation
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const char* kind, const std::string& what)
        : std::runtime_error(what), class_(cls), kind_(kind) {}
    ErrorClass error_class() const noexcept { return class_; }
    /// Short machine-readable name, e.g. "AllTermsRemoved".
    const char* kind() const noexcept { return kind_; }

private:
    ErrorClass class_;
    const char* kind_;
};

#define CLUSTINFO_DEFINE_ERROR(Name, Cls)                                          \
    class Name : public Error {                                                    \
    public:                                                                        \
        explicit Name(const std::string& what) : Error(ErrorClass::Cls, #Name, what) {} \
    }

CLUSTINFO_DEFINE_ERROR(PreconditionError, Config);
CLUSTINFO_DEFINE_ERROR(ConfigError, Config);

CLUSTINFO_DEFINE_ERROR(ParseError, Data);
CLUSTINFO_DEFINE_ERROR(DuplicateId, Data);
CLUSTINFO_DEFINE_ERROR(EmptyCorpus, Data);
CLUSTINFO_DEFINE_ERROR(EmptyResult, Data);
CLUSTINFO_DEFINE_ERROR(EmptyDictionary, Data);
CLUSTINFO_DEFINE_ERROR(NoLabeledDocuments, Data);
CLUSTINFO_DEFINE_ERROR(AllTermsRemoved, Data);

CLUSTINFO_DEFINE_ERROR(NetworkError, Compute);
CLUSTINFO_DEFINE_ERROR(RateLimited, Compute);
CLUSTINFO_DEFINE_ERROR(DimsTooLarge, Compute);
CLUSTINFO_DEFINE_ERROR(ConvergenceFailure, Compute);
CLUSTINFO_DEFINE_ERROR(KTooLarge, Compute);
CLUSTINFO_DEFINE_ERROR(EmptyCluster, Compute);
CLUSTINFO_DEFINE_ERROR(EmptySpec, Config);

#undef CLUSTINFO_DEFINE_ERROR

}  // namespace clustinfo
