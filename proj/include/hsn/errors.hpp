#pragma once

#include <stdexcept>
#include <string>

namespace hsn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HSN_DECLARE_ERROR(Name)                                   \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(what) {}   \
    }

HSN_DECLARE_ERROR(InvalidArgument);
HSN_DECLARE_ERROR(DimensionMismatch);
HSN_DECLARE_ERROR(NonSymmetricInput);
HSN_DECLARE_ERROR(SelfLoop);
HSN_DECLARE_ERROR(IsolatedNode);
HSN_DECLARE_ERROR(ScaleOutOfRange);
HSN_DECLARE_ERROR(TooLargeForDense);
HSN_DECLARE_ERROR(NotSymmetric);
HSN_DECLARE_ERROR(NoConvergence);
HSN_DECLARE_ERROR(PartialMap);
HSN_DECLARE_ERROR(HypothesisViolated);
HSN_DECLARE_ERROR(EmptyMask);
HSN_DECLARE_ERROR(NonFiniteLoss);
HSN_DECLARE_ERROR(TapeConsumed);
HSN_DECLARE_ERROR(MissingFile);
HSN_DECLARE_ERROR(RowCountMismatch);
HSN_DECLARE_ERROR(BadClassIds);
HSN_DECLARE_ERROR(InfeasibleSpec);
HSN_DECLARE_ERROR(ParseError);

#undef HSN_DECLARE_ERROR

}  // namespace hsn
