#include "svi/model.hpp"

#include <cmath>

namespace svi {

double x_plus(double c0)
{
    if (!(c0 >= 0.0))
        throw std::domain_error("x_plus: c0 must be nonnegative");
    return 0.5 * (-c0 / 3.0 + c0 * std::sqrt(1.0 / 9.0 + 4.0 * c0 / 6.0));
}

double threshold_poly(double c0, double k)
{
    return k * k + c0 / 3.0 * k - c0 * c0 * c0 / 6.0;
}

OscillatorParams validate_params(double c0, double k, double Y)
{
    if (!(c0 > 0.0) || !(k > 0.0) || !(Y > 0.0))
        throw InvalidParams(ParamError::NonPositive,
                            "validate_params: c0, k, Y must all be positive");
    if (!(k > x_plus(c0)))
        throw InvalidParams(ParamError::ThresholdViolation,
                            "validate_params: need k > X+(c0)");
    if (!(4.0 * k > c0 * c0))
        throw InvalidParams(ParamError::ComplexFrequency,
                            "validate_params: need 4k > c0^2 for a real frequency");
    return OscillatorParams{c0, k, Y, std::sqrt(4.0 * k - c0 * c0) / 2.0};
}

Regime regime_of(const State& s, const OscillatorParams& p)
{
    if (std::abs(s.z) > p.Y)
        throw std::domain_error("regime_of: |z| > Y violates the state invariant");
    if (s.z == p.Y && s.y > 0.0) return Regime::PlasticPositive;
    if (s.z == -p.Y && s.y < 0.0) return Regime::PlasticNegative;
    return Regime::Elastic;
}

const char* regime_name(Regime r)
{
    switch (r) {
    case Regime::PlasticPositive: return "plastic_pos";
    case Regime::PlasticNegative: return "plastic_neg";
    default: return "elastic";
    }
}

} // namespace svi
