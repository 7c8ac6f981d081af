#include "svi/brownian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace svi {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xd2e7470ee14c6c93ull;
constexpr std::uint64_t kPhiloxM1 = 0xca5a826395121157ull;
constexpr std::uint64_t kWeyl0 = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kWeyl1 = 0xbb67ae8584caa73bull;

inline void mul_hilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo)
{
    unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(prod >> 64);
    lo = static_cast<std::uint64_t>(prod);
}

inline std::array<std::uint64_t, 4> philox_round(const std::array<std::uint64_t, 4>& c,
                                                 const std::array<std::uint64_t, 2>& k)
{
    std::uint64_t hi0, lo0, hi1, lo1;
    mul_hilo(kPhiloxM0, c[0], hi0, lo0);
    mul_hilo(kPhiloxM1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// uniform in (0, 1]: top 53 bits, shifted away from zero
inline double to_unit(std::uint64_t x)
{
    return (static_cast<double>(x >> 11) + 1.0) * 0x1p-53;
}

} // namespace

std::array<std::uint64_t, 4> Philox4x64::block(const std::array<std::uint64_t, 2>& key,
                                               const std::array<std::uint64_t, 4>& counter)
{
    std::array<std::uint64_t, 2> k = key;
    std::array<std::uint64_t, 4> c = philox_round(counter, k);
    for (int r = 1; r < 10; ++r) {
        k[0] += kWeyl0;
        k[1] += kWeyl1;
        c = philox_round(c, k);
    }
    return c;
}

std::size_t PathSpec::n_steps() const
{
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw std::invalid_argument("PathSpec: dt and t_end must be positive");
    double n = std::ceil(t_end / dt);
    if (!(n < 9.0e15))
        throw std::overflow_error("PathSpec: step count overflows");
    return static_cast<std::size_t>(n);
}

std::array<double, 4> NormalStream::block_normals(std::uint64_t block) const
{
    auto w = Philox4x64::block(key_, {block, path_, stream_, 0});
    // Box-Muller on word pairs; u1 in (0,1] keeps the log finite.
    std::array<double, 4> n;
    const double r0 = std::sqrt(-2.0 * std::log(to_unit(w[0])));
    const double a0 = 2.0 * M_PI * to_unit(w[1]);
    const double r1 = std::sqrt(-2.0 * std::log(to_unit(w[2])));
    const double a1 = 2.0 * M_PI * to_unit(w[3]);
    n[0] = r0 * std::cos(a0);
    n[1] = r0 * std::sin(a0);
    n[2] = r1 * std::cos(a1);
    n[3] = r1 * std::sin(a1);
    return n;
}

double NormalStream::normal(std::uint64_t i) const
{
    const std::uint64_t block = i >> 2;
    if (block != cached_block_) {
        cache_ = block_normals(block);
        cached_block_ = block;
    }
    return cache_[i & 3];
}

BrownianPath generate(const PathSpec& spec)
{
    const std::size_t n = spec.n_steps();
    BrownianPath path{spec, 0, {}};
    path.increments.resize(n);
    NormalStream stream(spec.seed, spec.path_index, 0);
    const double sd = std::sqrt(spec.dt);
    for (std::size_t i = 0; i < n; ++i)
        path.increments[i] = sd * stream.normal(i);
    return path;
}

BrownianPath refine(const BrownianPath& path, int factor)
{
    if (factor < 2)
        throw std::invalid_argument("refine: factor must be >= 2");
    const std::size_t n = path.increments.size();
    const double fine_dt = path.spec.dt / factor;

    BrownianPath fine;
    fine.spec = path.spec;
    fine.spec.dt = fine_dt;
    fine.level = path.level + 1;
    fine.increments.resize(n * static_cast<std::size_t>(factor));

    NormalStream stream(path.spec.seed, path.spec.path_index, fine.level);
    const double sd = std::sqrt(fine_dt);
    std::vector<double> xi(factor);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < factor; ++j) {
            xi[j] = sd * stream.normal(i * factor + j);
            sum += xi[j];
        }
        // Condition the fresh draws on the coarse increment: shift by the
        // group mean defect, then close the group sum exactly on the last
        // sub-increment so coarse sums reproduce bit-for-bit.
        const double shift = (path.increments[i] - sum) / factor;
        double partial = 0.0;
        for (int j = 0; j + 1 < factor; ++j) {
            const double d = xi[j] + shift;
            fine.increments[i * factor + j] = d;
            partial += d;
        }
        fine.increments[i * factor + factor - 1] = path.increments[i] - partial;
    }
    return fine;
}

} // namespace svi
