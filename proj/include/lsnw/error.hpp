#pragma once

#include <stdexcept>
#include <string>

namespace lsnw {

/// Base of every domain error raised by the library. The CLI maps these to
/// exit code 2 (data/estimation error).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define LSNW_DEFINE_ERROR(Name)                                                \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {}   \
    }

LSNW_DEFINE_ERROR(InvalidArgument);
LSNW_DEFINE_ERROR(GridMismatch);
LSNW_DEFINE_ERROR(NonPositiveBandwidth);
LSNW_DEFINE_ERROR(EmptySupport);
LSNW_DEFINE_ERROR(QuantileLevelOutOfRange);
LSNW_DEFINE_ERROR(InvalidOrder);
LSNW_DEFINE_ERROR(DegenerateNeighborhood);
LSNW_DEFINE_ERROR(SampleTooSmall);
LSNW_DEFINE_ERROR(AllCandidatesDegenerate);
LSNW_DEFINE_ERROR(DegenerateDraw);
LSNW_DEFINE_ERROR(EmptyInput);
LSNW_DEFINE_ERROR(SeriesTooShort);
LSNW_DEFINE_ERROR(IndexOutOfBlock);

#undef LSNW_DEFINE_ERROR

} // namespace lsnw
