#ifndef LAME3_ERRORS_HPP
#define LAME3_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lame3
{

// Every failure raised by the library derives from lame3::error so callers
// (the CLI in particular) can separate numerical failures from usage errors.
class error : public std::runtime_error
{
public:
    error(std::string kind, const std::string &what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind))
    {}
    const std::string &kind() const noexcept
    {
        return kind_;
    }

private:
    std::string kind_;
};

#define LAME3_DEFINE_ERROR(name)                                                                   \
    class name : public error                                                                      \
    {                                                                                              \
    public:                                                                                        \
        explicit name(const std::string &what) : error(#name, what) {}                             \
    };

LAME3_DEFINE_ERROR(DomainError)
LAME3_DEFINE_ERROR(DegenerateLattice)
LAME3_DEFINE_ERROR(PoleProximity)
LAME3_DEFINE_ERROR(ConvergenceFailure)
LAME3_DEFINE_ERROR(RegimeError)
LAME3_DEFINE_ERROR(NonzeroRemainder)
LAME3_DEFINE_ERROR(NumericalInstability)
LAME3_DEFINE_ERROR(NotApparent)
LAME3_DEFINE_ERROR(CaseDegeneracy)
LAME3_DEFINE_ERROR(StepUnderflow)
LAME3_DEFINE_ERROR(ToleranceNotMet)
LAME3_DEFINE_ERROR(PathBlocked)

#undef LAME3_DEFINE_ERROR

} // namespace lame3

#endif
