// Oscillator parameters, state, and regime classification.
#pragma once

#include <stdexcept>
#include <string>

namespace svi {

// Validated parameter set of the white-noise-driven elasto-plastic oscillator:
// viscous damping c0 > 0, stiffness k > 0, elastic bound Y > 0 and the derived
// angular frequency omega = sqrt(4k - c0^2)/2. Construct via validate_params().
struct OscillatorParams {
    double c0;
    double k;
    double Y;
    double omega;
};

// Velocity / elastic-displacement pair. |z| <= Y is enforced by the
// integrators (clamp) and checked by regime_of.
struct State {
    double y;
    double z;
};

enum class Regime { Elastic, PlasticPositive, PlasticNegative };

enum class ParamError { NonPositive, ComplexFrequency, ThresholdViolation };

class InvalidParams : public std::invalid_argument {
public:
    InvalidParams(ParamError code, const std::string& what)
        : std::invalid_argument(what), code_(code) {}
    ParamError code() const noexcept { return code_; }

private:
    ParamError code_;
};

// Stiffness threshold X+(c0) = (1/2)(-c0/3 + c0*sqrt(1/9 + 4*c0/6)), the
// positive root of k^2 + (c0/3)k - c0^3/6 in k. Throws std::domain_error for
// negative c0.
double x_plus(double c0);

// k^2 + (c0/3)k - c0^3/6; positive exactly when k > x_plus(c0).
double threshold_poly(double c0, double k);

// Checks c0,k,Y > 0, then 4k > c0^2, then k > X+(c0); fills omega.
// Throws InvalidParams naming the first violated condition.
OscillatorParams validate_params(double c0, double k, double Y);

// PlasticPositive iff z == Y and y > 0; PlasticNegative iff z == -Y and
// y < 0; Elastic otherwise. Throws std::domain_error when |z| > Y.
Regime regime_of(const State& s, const OscillatorParams& p);

const char* regime_name(Regime r);

} // namespace svi
