#pragma once

#include <stdexcept>
#include <string>

namespace gazelab {

// Base of every library error. error_class() is a stable one-word tag the CLI
// prints so scripts can dispatch on failure kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* error_class() const noexcept { return "error"; }
};

#define GAZELAB_DEFINE_ERROR(Name, Tag)                                        \
    class Name : public Error {                                                \
    public:                                                                    \
        using Error::Error;                                                    \
        const char* error_class() const noexcept override { return Tag; }      \
    }

GAZELAB_DEFINE_ERROR(DegenerateGeometryError, "degenerate-geometry");
GAZELAB_DEFINE_ERROR(ParameterError, "parameter");
GAZELAB_DEFINE_ERROR(LayoutMismatchError, "layout-mismatch");
GAZELAB_DEFINE_ERROR(EmptyInputError, "empty-input");
GAZELAB_DEFINE_ERROR(SingularFitError, "singular-fit");
GAZELAB_DEFINE_ERROR(PredictionError, "prediction");
GAZELAB_DEFINE_ERROR(UnmatchedTrialError, "unmatched-trial");
GAZELAB_DEFINE_ERROR(UnknownPositionError, "unknown-position");
GAZELAB_DEFINE_ERROR(IoError, "io");
GAZELAB_DEFINE_ERROR(MissingFileError, "missing-file");
GAZELAB_DEFINE_ERROR(MalformedRecordError, "malformed-record");
GAZELAB_DEFINE_ERROR(NonUnitQuaternionError, "non-unit-quaternion");
GAZELAB_DEFINE_ERROR(SchemaVersionError, "schema-version");
GAZELAB_DEFINE_ERROR(ValidationError, "validation");
GAZELAB_DEFINE_ERROR(ModelFormatError, "model-format");
GAZELAB_DEFINE_ERROR(LookerMismatchError, "looker-mismatch");

#undef GAZELAB_DEFINE_ERROR

}  // namespace gazelab
