// Seed-reproducible Brownian increment streams on a counter-based generator,
// so coupled simulations can replay the identical path and Monte Carlo
// results are independent of thread count.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace svi {

// Philox 4x64, 10 rounds. One block of four 64-bit words per (key, counter).
struct Philox4x64 {
    static std::array<std::uint64_t, 4> block(const std::array<std::uint64_t, 2>& key,
                                              const std::array<std::uint64_t, 4>& counter);
};

struct PathSpec {
    double t_end = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;

    // ceil(t_end/dt); throws on invalid spec or step-count overflow.
    std::size_t n_steps() const;
};

// Stateless normal generator keyed by (seed, path_index, stream). Increment i
// of a dt-grid path is sqrt(dt) * normal(i); blocks of four normals share one
// Philox block, so any index can be regenerated at will.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t path_index, std::uint64_t stream = 0)
        : key_{seed, 0xda942042e4dd58b5ull}, path_(path_index), stream_(stream) {}

    double normal(std::uint64_t i) const;

private:
    std::array<double, 4> block_normals(std::uint64_t block) const;
    mutable std::uint64_t cached_block_ = ~0ull;
    mutable std::array<double, 4> cache_{};
    std::array<std::uint64_t, 2> key_;
    std::uint64_t path_;
    std::uint64_t stream_;
};

struct BrownianPath {
    PathSpec spec;
    // Refinement depth: 0 for generate(), +1 per refine() application. Fresh
    // bridge noise is drawn from the stream keyed by this level so refined
    // paths stay reproducible and independent of the base increments.
    std::uint32_t level = 0;
    std::vector<double> increments; // increment i ~ N(0, dt)
};

BrownianPath generate(const PathSpec& spec);

// Brownian-bridge refinement by an integer factor >= 2: the refined path
// lives on dt/factor and its sums over each coarse step reproduce the coarse
// increments exactly (last sub-increment closes each group by construction).
BrownianPath refine(const BrownianPath& path, int factor);

} // namespace svi
