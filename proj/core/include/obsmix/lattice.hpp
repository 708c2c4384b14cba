#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "obsmix/combinatorics.hpp"
#include "obsmix/entropy.hpp"
#include "obsmix/thermo.hpp"

// Two-species lattice gas on a periodic ring of L = L_A + L_B sites.
// Sites 0..L_A-1 form the left box. Species "+" is blue, "-" is red.

namespace obsmix::lattice {

enum class Occupancy { independent, site_exclusive };
enum class Statistics { fermion, hard_core_boson };

Occupancy occupancy_from_string(std::string_view name);
Statistics statistics_from_string(std::string_view name);
std::string_view to_string(Occupancy mode);
std::string_view to_string(Statistics stats);

/// Couplings default to the chaotic point.
struct Couplings {
    double t1 = 1.0;
    double v1 = 1.0;
    double t2 = 0.96;
    double v2 = 0.96;
};

struct LatticeSpec {
    int L_A = 0;
    int L_B = 0;
    int N_plus = 0;
    int N_minus = 0;
    Couplings couplings{};
    Occupancy occupancy = Occupancy::independent;
    Statistics statistics = Statistics::fermion;

    [[nodiscard]] int sites() const noexcept { return L_A + L_B; }
    [[nodiscard]] int particles() const noexcept { return N_plus + N_minus; }
    [[nodiscard]] combinatorics::BoxGeometry geometry() const { return {L_A, L_B}; }
    /// Throws DomainError on capacity violations, non-finite couplings or L > 32.
    void validate() const;
};

using Mask = std::uint64_t;

/// One basis state: bit s of `plus` (`minus`) is set when site s holds a blue (red) particle.
struct Occupation {
    Mask plus = 0;
    Mask minus = 0;
    friend bool operator==(const Occupation &, const Occupation &) = default;
};

/// Fixed-(N+, N-) block, ordered lexicographically by (plus word, minus word).
class Basis {
  public:
    static Basis build(const LatticeSpec &spec);

    [[nodiscard]] std::size_t size() const noexcept { return states_.size(); }
    [[nodiscard]] const Occupation &operator[](std::size_t index) const { return states_[index]; }
    [[nodiscard]] const std::vector<Occupation> &states() const noexcept { return states_; }
    /// Index of `state`, or size() when it is not in the block.
    [[nodiscard]] std::size_t index_of(const Occupation &state) const;
    [[nodiscard]] int N_plus() const noexcept { return N_plus_; }
    [[nodiscard]] int N_minus() const noexcept { return N_minus_; }
    [[nodiscard]] int sites() const noexcept { return sites_; }
    /// Site words like "+0-" (site 0 first); a doubly occupied site prints as "2".
    [[nodiscard]] std::string word(std::size_t index) const;

  private:
    std::vector<Occupation> states_;
    std::unordered_map<Mask, std::size_t> lookup_; ///< key plus | minus << 32
    int N_plus_ = 0;
    int N_minus_ = 0;
    int sites_ = 0;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Hopping per species at ranges 1 and 2 plus density interactions on the total
/// occupancy, with the sum over i taken literally on the ring (so short rings
/// visit the same bond more than once).
SparseMatrix build_hamiltonian(const LatticeSpec &spec, const Basis &basis);

/// Sectors keyed by (blue on left, red on left).
entropy::SectorPartition rick_partition(const LatticeSpec &spec, const Basis &basis);
/// Sectors keyed by total particles on the left.
entropy::SectorPartition morty_partition(const LatticeSpec &spec, const Basis &basis);

/// A Rick macrostate inside the block, by its left-box counts.
struct RickTarget {
    int blue_left = 0;
    int red_left = 0;

    /// All blue particles on the left, all red ones on the right.
    static RickTarget segregated(const LatticeSpec &spec) { return {spec.N_plus, 0}; }
    [[nodiscard]] combinatorics::RickLabel label(const LatticeSpec &spec) const;
};

enum class InitialMode { basis_state, haar };

InitialMode initial_mode_from_string(std::string_view name);
std::string_view to_string(InitialMode mode);

using State = Eigen::VectorXcd;

/// Unit vector supported on the target Rick sector. Basis mode picks one
/// member with the seed; Haar mode draws an isotropic vector on the sector.
State initial_state(const LatticeSpec &spec, const Basis &basis, InitialMode mode, std::uint64_t seed,
                    std::optional<RickTarget> target = std::nullopt);

enum class Method { automatic, dense, krylov };

Method method_from_string(std::string_view name);
std::string_view to_string(Method method);

struct EvolutionPlan {
    std::vector<double> times;
    Method method = Method::automatic;
    InitialMode initial = InitialMode::haar;
    std::uint64_t seed = 0;
    double krylov_tol = 1e-10;
    int krylov_dim = 30;
    std::size_t dense_threshold = 4096;
    /// Largest block whose full spectrum is computed for thermal statistics.
    std::size_t spectrum_limit = 8192;
    int threads = 1;

    /// `points` equally spaced times on [0, t_max].
    static std::vector<double> uniform_grid(int points, double t_max);
    /// Throws DomainError unless times are nonnegative and strictly increasing.
    void validate() const;
};

/// Real symmetric eigensystem of a dense copy of H.
struct Eigensystem {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};
Eigensystem diagonalize(const SparseMatrix &H);
Eigen::VectorXd eigenvalues(const SparseMatrix &H);

struct Evolution {
    std::vector<State> states;
    Method method = Method::dense;
    /// Largest accepted Lanczos error estimate; zero for the dense path.
    double max_step_error = 0.0;
    int substeps = 0;
};

/// psi(t) = exp(-iHt) psi0 on every grid time via a full eigendecomposition.
Evolution evolve_dense(const Eigensystem &eig, const State &psi0, const std::vector<double> &times, int threads = 1);
/// Lanczos propagation with step halving until each step's error estimate is below `tol`.
/// Throws DomainError with the achieved estimate when a step cannot be made small enough.
Evolution evolve_krylov(const SparseMatrix &H, const State &psi0, const std::vector<double> &times, double tol,
                        int krylov_dim = 30);
/// Dispatches on plan.method; automatic picks dense up to plan.dense_threshold.
Evolution evolve(const SparseMatrix &H, const State &psi0, const EvolutionPlan &plan);

State multiply(const SparseMatrix &H, const State &psi);
double expectation(const SparseMatrix &H, const State &psi);

struct TimeSeriesRecord {
    double t = 0.0;
    double S_rick = 0.0;
    double S_morty1 = 0.0;
    double E_mean = 0.0;
    double beta_obs = 0.0;
    double W = 0.0;
    double dW_exact = 0.0;
    double dW_av = 0.0;
    double dW_av2 = 0.0;
};

struct TimeSeries {
    std::vector<TimeSeriesRecord> records;
    double S_init = 0.0; ///< ln V^R of the initial macrostate
    double S_fin = 0.0;  ///< ln of the block dimension
    double E0 = 0.0;
    std::size_t dimension = 0;
    Method method = Method::dense;
    double max_step_error = 0.0;
};

/// Observational entropies with exact sector sizes, observational temperature
/// from the block spectrum, and Rick-minus-Morty work differences at each time.
TimeSeries run_mixing_timeseries(const LatticeSpec &spec, const EvolutionPlan &plan,
                                 std::optional<RickTarget> target = std::nullopt);

/// One static geometry: N_A blue particles fill the left box, N_B red ones the right.
struct ScanPoint {
    int L_A = 0;
    int L_B = 0;
    int N_A = 0;
    int N_B = 0;
};

/// Symmetric ladder N_A = N_B = n, L_A = L_B = L/2 for each even L.
std::vector<ScanPoint> symmetric_ladder(const std::vector<int> &L_values, int n = 2);
/// Asymmetric ladder with L_B = floor(N_B L_A / N_A).
std::vector<ScanPoint> asymmetric_ladder(const std::vector<int> &L_A_values, int N_A = 3, int N_B = 2);

struct ScanRecord {
    ScanPoint point;
    std::size_t dim_block = 0;
    double dS = 0.0;
    double T_obs = 0.0;
    double dW_exact = 0.0;
    double dW0 = 0.0;
    double dW1 = 0.0;
    double dW2 = 0.0;
    double dW_av = 0.0;
    double dW_av2 = 0.0;
    std::string error; ///< empty on success
};

struct ScanOptions {
    Couplings couplings{};
    Occupancy occupancy = Occupancy::independent;
    Statistics statistics = Statistics::fermion;
    double solver_tol = 1e-10;
    std::size_t spectrum_limit = 8192;
    int threads = 1;
};

/// Rick versus Morty 1 for a state spread over one Rick macrostate: dS from
/// exact sector sizes, exact and expanded work differences from the block spectrum.
/// Domain failures land in the error column; the scan continues.
std::vector<ScanRecord> run_static_scan(const std::vector<ScanPoint> &points, const ScanOptions &options);

/// The block spectrum as a thermo spectrum (degenerate levels merged).
thermo::Spectrum block_spectrum(const LatticeSpec &spec, std::size_t spectrum_limit = 8192);

} // namespace obsmix::lattice
