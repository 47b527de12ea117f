#pragma once

#include <stdexcept>
#include <string>

namespace oscar {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define OSCAR_ERROR(Name)                                  \
    struct Name : Error {                                  \
        explicit Name(const std::string& msg = #Name)      \
            : Error(std::string(#Name) + ": " + msg) {}    \
    }

OSCAR_ERROR(PeriodTooSmall);
OSCAR_ERROR(DegenerateCritical);
OSCAR_ERROR(WrongCriticalCount);
OSCAR_ERROR(DeltaTooLarge);
OSCAR_ERROR(ZeroMode);
OSCAR_ERROR(NearSingular);
OSCAR_ERROR(AlphaOutOfRange);
OSCAR_ERROR(RegimeMismatch);
OSCAR_ERROR(QuadratureFailure);
OSCAR_ERROR(StencilOutOfRange);
OSCAR_ERROR(NodeFailure);
OSCAR_ERROR(TailTooLarge);
OSCAR_ERROR(StepRejection);
OSCAR_ERROR(WindowTooShort);
OSCAR_ERROR(NoPlateaus);
OSCAR_ERROR(ConfigInvalid);

#undef OSCAR_ERROR

}  // namespace oscar
