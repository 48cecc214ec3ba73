#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "pc2/problem.hpp"

namespace pc2 {

/// Raised when a design request cannot be satisfied (over-constrained
/// boundary set, impossible point allocation).
struct DesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Independent seed stream: mixes a base seed with a stream tag and index so
/// trials, virtual draws and validation sets never share RNG state.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
    return detail::splitmix64(detail::splitmix64(base ^ (stream * 0x9e3779b97f4a7c15ULL)) + index);
}

namespace seed_stream {
inline constexpr std::uint64_t experimental_design = 1;
inline constexpr std::uint64_t virtual_points = 2;
inline constexpr std::uint64_t validation = 3;
inline constexpr std::uint64_t boundary_validation = 4;
inline constexpr std::uint64_t trial = 5;
inline constexpr std::uint64_t resample = 6;
}  // namespace seed_stream

/// Deterministic RNG with explicit uniform/shuffle implementations, so the
/// same seed gives the same stream on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        // rejection sampling avoids modulo bias
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[uniform_int(i)]);
    }

private:
    std::mt19937_64 gen_;
};

/// Latin hypercube sample of n points in [-1,1]^dims: per dimension an
/// independent random permutation of the n strata, one uniformly jittered
/// point per stratum. Deterministic given the seed.
inline Eigen::MatrixXd sample_lhs(int n, int dims, std::uint64_t seed) {
    if (n < 0 || dims < 1) throw std::invalid_argument("sample_lhs: bad size");
    Eigen::MatrixXd pts(n, dims);
    if (n == 0) return pts;
    Rng rng(seed);
    std::vector<int> perm(n);
    for (int d = 0; d < dims; ++d) {
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        for (int i = 0; i < n; ++i) {
            const double u = (perm[i] + rng.uniform01()) / n;  // stratified in [0,1)
            pts(i, d) = 2.0 * u - 1.0;
        }
    }
    return pts;
}

/// Crude Monte Carlo sample of n points in [-1,1]^dims.
inline Eigen::MatrixXd sample_mc(int n, int dims, std::uint64_t seed) {
    if (n < 0 || dims < 1) throw std::invalid_argument("sample_mc: bad size");
    Eigen::MatrixXd pts(n, dims);
    Rng rng(seed);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < dims; ++d) pts(i, d) = rng.uniform(-1.0, 1.0);
    return pts;
}

enum class Sampler { lhs, mc };

inline Eigen::MatrixXd sample(Sampler s, int n, int dims, std::uint64_t seed) {
    return s == Sampler::lhs ? sample_lhs(n, dims, seed) : sample_mc(n, dims, seed);
}

/// n_V = P - n_BC, the count that keeps the KKT system well determined.
inline int virtual_point_count(int basis_size, int n_bc) {
    if (basis_size <= n_bc)
        throw DesignError("boundary constraints (" + std::to_string(n_bc) +
                          ") leave no degrees of freedom for PDE constraints with basis size " +
                          std::to_string(basis_size) + "; raise p or reduce n_BC");
    return basis_size - n_bc;
}

/// One boundary collocation point: standardized coordinates, the index of the
/// boundary condition it enforces, and the prescribed target g at the point.
struct BoundaryPoint {
    Eigen::VectorXd xi;
    int bc_index = 0;
    double target = 0.0;
};

namespace detail {

/// Split n into counts per family, round-robin so counts differ by at most 1.
inline std::vector<int> round_robin_split(int n, int families) {
    std::vector<int> counts(families, n / families);
    for (int i = 0; i < n % families; ++i) counts[i] += 1;
    return counts;
}

inline double even_spacing(double lo, double hi, int count, int i) {
    if (count == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

/// Kronecker (R_d) lattice generators: inverse powers of the root of
/// x^(d+1) = x + 1. Deterministic, well spread, and free of the axis-aligned
/// grid structure that would let a polynomial vanish on every point.
inline std::vector<double> kronecker_generators(int d) {
    double phi = 1.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (d + 1));
    std::vector<double> g(d);
    double a = 1.0;
    for (int j = 0; j < d; ++j) {
        a /= phi;
        g[j] = a;
    }
    return g;
}

}  // namespace detail

/// Deterministic boundary collocation. Point conditions (every deterministic
/// variable fixed... i.e. no free variables) get exactly one point each; the
/// remaining budget is split round-robin across face conditions. A face with
/// one free variable is covered by even spacing with the endpoints included;
/// faces with several free variables use a Kronecker lattice.
inline std::vector<BoundaryPoint> boundary_points(const ProblemSpec& problem, int n_bc) {
    const int dim = problem.dimension();
    const int families = static_cast<int>(problem.bcs.size());
    if (families == 0) {
        if (n_bc != 0) throw DesignError("boundary points requested but the problem has no BCs");
        return {};
    }
    if (n_bc < families)
        throw DesignError("n_BC = " + std::to_string(n_bc) + " cannot cover " +
                          std::to_string(families) + " boundary conditions");

    std::vector<bool> is_point(families, false);
    int point_conditions = 0;
    for (int b = 0; b < families; ++b) {
        bool free_any = false;
        for (int i = 0; i < dim; ++i)
            if (!problem.bcs[b].location[i].has_value()) free_any = true;
        is_point[b] = !free_any;
        point_conditions += is_point[b];
    }
    std::vector<int> counts;
    if (point_conditions == families) {
        if (n_bc != families)
            throw DesignError("all boundary conditions are point conditions; n_BC must equal " +
                              std::to_string(families));
        counts.assign(families, 1);
    } else {
        counts = detail::round_robin_split(n_bc - point_conditions,
                                           families - point_conditions);
        // merge: point conditions take exactly 1
        std::vector<int> merged(families);
        int fi = 0;
        for (int b = 0; b < families; ++b) merged[b] = is_point[b] ? 1 : counts[fi++];
        counts = merged;
    }

    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<BoundaryPoint> out;
    out.reserve(n_bc);
    for (int b = 0; b < families; ++b) {
        const auto& bc = problem.bcs[b];
        std::vector<int> free_dims;
        for (int i = 0; i < dim; ++i)
            if (!bc.location[i].has_value()) free_dims.push_back(i);

        const int d_free = static_cast<int>(free_dims.size());
        const auto generators = d_free >= 2 ? detail::kronecker_generators(d_free)
                                            : std::vector<double>{};
        for (int k = 0; k < counts[b]; ++k) {
            BoundaryPoint pt;
            pt.bc_index = b;
            pt.xi.resize(dim);
            for (int i = 0; i < dim; ++i) {
                const auto& t = problem.variables[i].transform;
                if (bc.location[i].has_value()) {
                    pt.xi(i) = t.to_standard(*bc.location[i]);
                } else if (d_free == 1) {
                    pt.xi(i) = detail::even_spacing(-1.0, 1.0, counts[b], k);
                } else {
                    const auto it = std::find(free_dims.begin(), free_dims.end(), i);
                    const int fd = static_cast<int>(it - free_dims.begin());
                    const double u = std::fmod(0.5 + (k + 1) * generators[fd], 1.0);
                    pt.xi(i) = 2.0 * u - 1.0;
                }
            }
            names.clear();
            values.clear();
            for (int i = 0; i < dim; ++i) {
                names.push_back(problem.variables[i].name);
                values.push_back(problem.variables[i].transform.from_standard(pt.xi(i)));
            }
            const EvalEnv env{names, values, std::nullopt};
            pt.target = bc.op.rhs.empty() ? 0.0 : bc.op.rhs.eval(env);
            out.push_back(std::move(pt));
        }
    }
    return out;
}

/// Random points on the boundary faces for validation of BC residuals:
/// location variables fixed, free variables drawn uniformly. Round-robin over
/// condition families, deterministic given the seed.
inline std::vector<BoundaryPoint> boundary_validation_points(const ProblemSpec& problem, int n,
                                                             std::uint64_t seed) {
    const int dim = problem.dimension();
    const int families = static_cast<int>(problem.bcs.size());
    if (families == 0 || n <= 0) return {};
    Rng rng(seed);
    std::vector<BoundaryPoint> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        const int b = k % families;
        const auto& bc = problem.bcs[b];
        BoundaryPoint pt;
        pt.bc_index = b;
        pt.xi.resize(dim);
        for (int i = 0; i < dim; ++i) {
            const auto& t = problem.variables[i].transform;
            pt.xi(i) = bc.location[i].has_value() ? t.to_standard(*bc.location[i])
                                                  : rng.uniform(-1.0, 1.0);
        }
        out.push_back(std::move(pt));
    }
    return out;
}

}  // namespace pc2
