#pragma once

#include <stdexcept>
#include <string>

namespace afvm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define AFVM_DEFINE_ERROR(Name)                                                 \
    class Name : public Error {                                                 \
    public:                                                                     \
        using Error::Error;                                                     \
    }

// mesh_core / nvb_refine
AFVM_DEFINE_ERROR(NonConforming);
AFVM_DEFINE_ERROR(DegenerateElement);
AFVM_DEFINE_ERROR(IndexOutOfRange);
AFVM_DEFINE_ERROR(InvalidMark);

// quadrature / problems
AFVM_DEFINE_ERROR(UnsupportedDegree);
AFVM_DEFINE_ERROR(ParseError);
AFVM_DEFINE_ERROR(UnknownBuiltin);
AFVM_DEFINE_ERROR(NonSymmetricCoefficient);
AFVM_DEFINE_ERROR(EvaluationOutsideDomain);

// sparse_linalg / discretization
AFVM_DEFINE_ERROR(DimensionMismatch);
AFVM_DEFINE_ERROR(NotSymmetric);
AFVM_DEFINE_ERROR(SingularMatrix);
AFVM_DEFINE_ERROR(BreakdownDetected);
AFVM_DEFINE_ERROR(NoConvergence);
AFVM_DEFINE_ERROR(MissingExact);

// estimator / adaptivity / reporting
AFVM_DEFINE_ERROR(BoundaryEdge);
AFVM_DEFINE_ERROR(InsufficientData);
AFVM_DEFINE_ERROR(ValidationError);
AFVM_DEFINE_ERROR(IoError);

#undef AFVM_DEFINE_ERROR

} // namespace afvm
