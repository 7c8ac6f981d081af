#include "svi/gaussian.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace svi {

namespace {

void require_positive_t(double t)
{
    if (!(t > 0.0))
        throw std::domain_error("time must be positive (point mass at t = 0)");
}

// Antiderivatives on [0,t] of e^{-c0 u}, e^{-c0 u} cos(2 w u), e^{-c0 u} sin(2 w u).
double int_exp(double t, const OscillatorParams& p)
{
    return -std::expm1(-p.c0 * t) / p.c0;
}

double int_exp_cos2(double t, const OscillatorParams& p)
{
    const double w = p.omega, c0 = p.c0;
    return (c0 + std::exp(-c0 * t) * (2.0 * w * std::sin(2.0 * w * t) - c0 * std::cos(2.0 * w * t))) /
           (4.0 * p.k);
}

double int_exp_sin2(double t, const OscillatorParams& p)
{
    const double w = p.omega, c0 = p.c0;
    return (2.0 * w - std::exp(-c0 * t) * (c0 * std::sin(2.0 * w * t) + 2.0 * w * std::cos(2.0 * w * t))) /
           (4.0 * p.k);
}

} // namespace

double sigma_z2(double t, const OscillatorParams& p)
{
    if (t == 0.0) return 0.0;
    require_positive_t(t);
    const double w2 = p.omega * p.omega;
    // The antiderivative difference cancels two leading orders (result ~ t^3/3
    // from O(t) pieces); below the smallness threshold use the exact series
    //   (1/2w^2) sum_m [(-c0)^m - Re((-c0+2iw)^m)] t^{m+1}/(m+1)!
    // whose m = 0,1 terms vanish identically.
    if (2.0 * std::sqrt(p.k) * t <= 0.5) {
        const std::complex<double> lam(-p.c0, 2.0 * p.omega);
        std::complex<double> lam_pow = lam * lam;
        double c_pow = p.c0 * p.c0;
        double t_pow = t * t * t / 6.0; // t^{m+1}/(m+1)! at m = 2
        double sum = 0.0;
        for (int m = 2; m < 44; ++m) {
            sum += (c_pow - lam_pow.real()) * t_pow;
            lam_pow *= lam;
            c_pow *= -p.c0;
            t_pow *= t / (m + 2);
        }
        return sum / (2.0 * w2);
    }
    return (int_exp(t, p) - int_exp_cos2(t, p)) / (2.0 * w2);
}

double sigma_y2(double t, const OscillatorParams& p)
{
    if (t == 0.0) return 0.0;
    require_positive_t(t);
    const double w = p.omega, c0 = p.c0;
    const double a = c0 * c0 / (8.0 * w * w);
    return (0.5 + a) * int_exp(t, p) + (0.5 - a) * int_exp_cos2(t, p) -
           c0 / (2.0 * w) * int_exp_sin2(t, p);
}

double sigma_yz(double t, const OscillatorParams& p)
{
    const double s = std::sin(p.omega * t);
    return std::exp(-p.c0 * t) * s * s / (2.0 * p.omega * p.omega);
}

double mean_response_f(double t, const OscillatorParams& p)
{
    return std::exp(-p.c0 * t / 2.0) *
           (std::cos(p.omega * t) + p.c0 / (2.0 * p.omega) * std::sin(p.omega * t));
}

double mean_response_g(double t, const OscillatorParams& p)
{
    return p.k / p.omega * std::exp(-p.c0 * t / 2.0) * std::sin(p.omega * t);
}

double one_minus_f(double t, const OscillatorParams& p)
{
    // f(t) = Re[a e^{mu t}] with a = 1 - i c0/(2w), mu = -c0/2 + i w, and
    // a*mu = i k/w exactly, so the series of 1-f starts cleanly at t^2:
    //   1 - f = -sum_{m>=2} Re(a mu^m) t^m / m!
    if (std::sqrt(p.k) * t <= 0.5) {
        const std::complex<double> mu(-p.c0 / 2.0, p.omega);
        std::complex<double> b = std::complex<double>(0.0, p.k / p.omega) * mu; // a mu^2
        double t_pow = t * t / 2.0;
        double sum = 0.0;
        for (int m = 2; m < 44; ++m) {
            sum -= b.real() * t_pow;
            b *= mu;
            t_pow *= t / (m + 1);
        }
        return sum;
    }
    return 1.0 - mean_response_f(t, p);
}

GaussMoments moments(double t, double eps, const OscillatorParams& p)
{
    if (!(t >= 0.0))
        throw std::domain_error("moments: t must be nonnegative");
    if (!(eps >= 0.0) || !(eps < p.Y))
        throw std::invalid_argument("moments: eps must lie in [0, Y)");
    GaussMoments mo{};
    const double z0 = p.Y - eps;
    mo.m = z0 * mean_response_f(t, p);
    mo.q = -z0 * mean_response_g(t, p);
    mo.var_z = sigma_z2(t, p);
    mo.var_y = sigma_y2(t, p);
    mo.cov_yz = sigma_yz(t, p);
    mo.rho = (t > 0.0) ? mo.cov_yz / std::sqrt(mo.var_y * mo.var_z) : 0.0;
    return mo;
}

AuxFunctions aux(double t, const OscillatorParams& p)
{
    require_positive_t(t);
    AuxFunctions a{};
    a.f = mean_response_f(t, p);
    a.g = mean_response_g(t, p);
    const double sy = std::sqrt(sigma_y2(t, p));
    const double sz = std::sqrt(sigma_z2(t, p));
    const double rho = sigma_yz(t, p) / (sy * sz);
    const double omr2 = 1.0 - rho * rho;
    a.A = (a.g * a.g / (sy * sy) + a.f * a.f / (sz * sz) + 2.0 * rho * a.g * a.f / (sy * sz)) / omr2;
    a.r = a.g * sz / sy + rho * a.f;
    a.s = a.f * sy / sz + rho * a.g;
    const double omf = one_minus_f(t, p);
    a.h = -a.g * a.r + omf * a.s;
    a.l = -a.g * a.r - (1.0 + a.f) * a.s;
    a.q_tilde0 = -p.Y * a.g + rho * p.Y * omf * sy / sz;
    return a;
}

double h_small_t_coefficient(const OscillatorParams& p)
{
    return std::sqrt(3.0) / 4.0 * (p.c0 * p.k / 3.0);
}

namespace {

// Quadratic form and normalization in extended precision; the exponents reach
// ~1e5 near t -> 0 on the test grids, where double rounding alone would be
// visible at the 1e-10 identity gate.
long double quad_form(long double dy, long double dz, long double sy, long double sz,
                      long double rho)
{
    const long double omr2 = 1.0L - rho * rho;
    return ((dy / sy) * (dy / sy) + (dz / sz) * (dz / sz) - 2.0L * rho * (dy / sy) * (dz / sz)) /
           omr2;
}

struct DensityParts {
    long double sy, sz, rho, log_norm;
};

DensityParts density_parts(double t, const OscillatorParams& p)
{
    DensityParts d{};
    d.sy = std::sqrt((long double)sigma_y2(t, p));
    d.sz = std::sqrt((long double)sigma_z2(t, p));
    d.rho = (long double)sigma_yz(t, p) / (d.sy * d.sz);
    d.log_norm = -std::log(2.0L * M_PIl * d.sy * d.sz * std::sqrt(1.0L - d.rho * d.rho));
    return d;
}

long double log_density_impl(double y, double z, double t, double eps, const OscillatorParams& p)
{
    const DensityParts d = density_parts(t, p);
    const long double z0 = (long double)p.Y - eps;
    const long double m = z0 * (long double)mean_response_f(t, p);
    const long double q = -z0 * (long double)mean_response_g(t, p);
    return d.log_norm - 0.5L * quad_form(y - q, z - m, d.sy, d.sz, d.rho);
}

long double log_ratio_impl(double y, double z, double t, double eps, const OscillatorParams& p)
{
    const AuxFunctions a = aux(t, p);
    const DensityParts d = density_parts(t, p);
    const long double omr2 = 1.0L - d.rho * d.rho;
    const long double q0 = -(long double)p.Y * a.g;
    const long double m0 = (long double)p.Y * a.f;
    const long double lin = ((y - q0) * (long double)a.r - (z - m0) * (long double)a.s) /
                            (omr2 * d.sy * d.sz);
    return -0.5L * (long double)eps * eps * (long double)a.A + (long double)eps * lin;
}

} // namespace

double log_density_p(double y, double z, double t, double eps, const OscillatorParams& p)
{
    require_positive_t(t);
    return static_cast<double>(log_density_impl(y, z, t, eps, p));
}

double density_p(double y, double z, double t, double eps, const OscillatorParams& p)
{
    return std::exp(log_density_p(y, z, t, eps, p));
}

double log_density_ratio_factor(double y, double z, double t, double eps,
                                const OscillatorParams& p)
{
    require_positive_t(t);
    return static_cast<double>(log_ratio_impl(y, z, t, eps, p));
}

double density_ratio_factor(double y, double z, double t, double eps, const OscillatorParams& p)
{
    return std::exp(log_density_ratio_factor(y, z, t, eps, p));
}

double density_ratio_log_residual(double y, double z, double t, double eps,
                                  const OscillatorParams& p)
{
    require_positive_t(t);
    return static_cast<double>(log_density_impl(y, z, t, eps, p) -
                               log_density_impl(y, z, t, 0.0, p) -
                               log_ratio_impl(y, z, t, eps, p));
}

ExpansionReport expansions_check(const std::vector<double>& t_grid, const OscillatorParams& p)
{
    const double c0 = p.c0, k = p.k, Y = p.Y;
    const double s3 = std::sqrt(3.0);

    struct Row {
        const char* name;
        double (*exact)(double, const OscillatorParams&);
        double (*series)(double, const OscillatorParams&);
        double (*scale)(double);
        double bound;
    };

    // Bounds: 4x the 40-digit sup of the true remainder ratio over
    // [1e-4, 1e-2] (checked at (c0,k) = (1,1) and (0.8,1.3)), widened where
    // double rounding of the exact evaluation is visible at t = 1e-4.
    static const Row rows[] = {
        {"f", [](double t, const OscillatorParams& q) { return mean_response_f(t, q); },
         [](double t, const OscillatorParams& q) {
             return 1.0 - q.k * t * t / 2.0 + q.c0 * q.k * t * t * t / 6.0;
         },
         [](double t) { return t * t * t * t; }, 10.0},
        {"g", [](double t, const OscillatorParams& q) { return mean_response_g(t, q); },
         [](double t, const OscillatorParams& q) { return q.k * t * (1.0 - q.c0 * t / 2.0); },
         [](double t) { return t * t * t; }, 0.6},
        {"sigma_y2", [](double t, const OscillatorParams& q) { return sigma_y2(t, q); },
         [](double t, const OscillatorParams& q) { return t - q.c0 * t * t; },
         [](double t) { return t * t * t; }, 1.5},
        {"sigma_z2", [](double t, const OscillatorParams& q) { return sigma_z2(t, q); },
         [](double t, const OscillatorParams& q) {
             return t * t * t / 3.0 - q.c0 * t * t * t * t / 4.0;
         },
         [](double t) { return t * t * t * t * t; }, 0.25},
        {"sigma_z_over_sigma_y",
         [](double t, const OscillatorParams& q) { return std::sqrt(sigma_z2(t, q) / sigma_y2(t, q)); },
         [](double t, const OscillatorParams& q) {
             return t / std::sqrt(3.0) * (1.0 + q.c0 * t / 8.0);
         },
         [](double t) { return t * t * t; }, 0.15},
        {"rho",
         [](double t, const OscillatorParams& q) {
             return sigma_yz(t, q) / std::sqrt(sigma_y2(t, q) * sigma_z2(t, q));
         },
         [](double t, const OscillatorParams& q) {
             return std::sqrt(3.0) / 2.0 * (1.0 - q.c0 * t / 8.0);
         },
         [](double t) { return t * t; }, 0.4},
        {"q0", [](double t, const OscillatorParams& q) { return -q.Y * mean_response_g(t, q); },
         [](double t, const OscillatorParams& q) {
             return -q.Y * q.k * t * (1.0 - q.c0 * t / 2.0);
         },
         [](double t) { return t * t * t; }, 0.6},
        {"m0", [](double t, const OscillatorParams& q) { return q.Y * mean_response_f(t, q); },
         [](double t, const OscillatorParams& q) { return q.Y * (1.0 - q.k * t * t / 2.0); },
         [](double t) { return t * t * t; }, 0.7},
        {"h", [](double t, const OscillatorParams& q) { return aux(t, q).h; },
         [](double t, const OscillatorParams& q) { return h_small_t_coefficient(q) * t * t; },
         [](double t) { return t * t * t; }, 0.6},
        {"r_over_sysz",
         [](double t, const OscillatorParams& q) {
             return aux(t, q).r / std::sqrt(sigma_y2(t, q) * sigma_z2(t, q));
         },
         [](double t, const OscillatorParams& q) {
             return 3.0 / (2.0 * t * t) * (1.0 + 3.0 * q.c0 * t / 4.0);
         },
         [](double) { return 1.0; }, 4.0},
    };
    (void)c0; (void)k; (void)Y; (void)s3;

    ExpansionReport rep{};
    rep.all_pass = true;
    for (const Row& row : rows) {
        double sup = 0.0;
        for (double t : t_grid) {
            const double ex = row.exact(t, p);
            const double se = row.series(t, p);
            const double ratio = std::abs(ex - se) / row.scale(t);
            rep.points.push_back({row.name, t, ex, se, ratio});
            sup = std::max(sup, ratio);
        }
        const bool pass = sup <= row.bound;
        rep.checks.push_back({row.name, sup, row.bound, pass});
        rep.all_pass = rep.all_pass && pass;
    }
    return rep;
}

double boundary_moment_y3(double eta, double t, const OscillatorParams& p)
{
    if (!(eta > 0.0))
        throw std::invalid_argument("boundary_moment_y3: eta must be positive");
    require_positive_t(t);

    const double sy = std::sqrt(sigma_y2(t, p));
    const double sz = std::sqrt(sigma_z2(t, p));
    const double rho = sigma_yz(t, p) / (sy * sz);
    const double c = std::sqrt(1.0 - rho * rho);
    const double omf = one_minus_f(t, p);
    const AuxFunctions ax = aux(t, p);
    const double qt = ax.q_tilde0;

    const double a = (-eta - qt) / (c * sy);
    const double b = -qt / (c * sy);

    // Gaussian moments of u^j e^{-u^2/2} on [a,b], j = 0..3 (closed in erf).
    const double ea = std::exp(-0.5 * a * a), eb = std::exp(-0.5 * b * b);
    const double i0 = std::sqrt(M_PI / 2.0) * (std::erf(b / std::sqrt(2.0)) - std::erf(a / std::sqrt(2.0)));
    const double i1 = ea - eb;
    const double i2 = a * ea - b * eb + i0;
    const double i3 = (a * a + 2.0) * ea - (b * b + 2.0) * eb;

    const double cs = c * sy;
    const double L = (qt * qt * qt * i0 + 3.0 * qt * qt * cs * i1 + 3.0 * qt * cs * cs * i2 +
                      cs * cs * cs * i3) /
                     std::sqrt(2.0 * M_PI);

    const double zres = p.Y * omf; // Y - m0(t)
    return std::exp(-0.5 * zres * zres / (sz * sz)) / (std::sqrt(2.0 * M_PI) * sz) * L;
}

} // namespace svi
