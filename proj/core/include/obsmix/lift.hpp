#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "obsmix/errors.hpp"

// Color-blind description of a site-exclusive two-color lattice and its lift
// back to the colored space.
//
// The colored block with N+ blue particles out of N is identified with
// (configuration space) x (colorings), a coloring being the sequence of
// colors read left to right over the occupied sites. The lift of a
// configuration vector c into that block is c (x) C^m, m = C(N, N+).

namespace obsmix::lift {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Rng = std::mt19937_64;

/// Hard-core single-species configurations with N particles on L sites.
class ConfigurationSpace {
  public:
    ConfigurationSpace(int L, int N);

    [[nodiscard]] int sites() const noexcept { return L_; }
    [[nodiscard]] int particles() const noexcept { return N_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return static_cast<Eigen::Index>(masks_.size()); }
    [[nodiscard]] std::uint64_t mask(Eigen::Index x) const { return masks_.at(static_cast<std::size_t>(x)); }
    /// Throws InvalidLabel when the mask has the wrong particle number or width.
    [[nodiscard]] Eigen::Index index_of(std::uint64_t mask) const;
    /// "011": site 0 first.
    [[nodiscard]] std::string word(Eigen::Index x) const;
    [[nodiscard]] Eigen::Index index_of_word(const std::string &word) const;

  private:
    int L_;
    int N_;
    std::vector<std::uint64_t> masks_;
};

/// Site-exclusive colored space: the direct sum over N+ = 0..N of blocks
/// (configuration) x (coloring).
class ColoredSpace {
  public:
    ColoredSpace(int L, int N);

    [[nodiscard]] const ConfigurationSpace &configurations() const noexcept { return config_; }
    [[nodiscard]] int particles() const noexcept { return config_.particles(); }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return dimension_; }
    [[nodiscard]] int blocks() const noexcept { return particles() + 1; }
    [[nodiscard]] Eigen::Index block_offset(int N_plus) const;
    [[nodiscard]] Eigen::Index block_dimension(int N_plus) const;
    /// Number of colorings m = C(N, N+).
    [[nodiscard]] Eigen::Index fiber_dimension(int N_plus) const;
    [[nodiscard]] Eigen::Index index(int N_plus, Eigen::Index x, Eigen::Index coloring) const;
    [[nodiscard]] int block_of(Eigen::Index index) const;
    /// Colored word over {0, +, -}, e.g. "0+-".
    [[nodiscard]] std::string word(Eigen::Index index) const;
    [[nodiscard]] Eigen::Index index_of_word(const std::string &word) const;
    /// Color word of coloring `coloring` in block N+, e.g. "+-".
    [[nodiscard]] const std::string &coloring(int N_plus, Eigen::Index coloring) const;

    /// Matrix of the color-erasing map K: |x, coloring> -> |x>.
    [[nodiscard]] Matrix erasure() const;
    /// Orthogonal projector onto block N+.
    [[nodiscard]] Matrix block_projector(int N_plus) const;

  private:
    ConfigurationSpace config_;
    std::vector<std::vector<std::string>> colorings_;
    std::vector<Eigen::Index> offsets_;
    Eigen::Index dimension_ = 0;
};

/// Orthonormal basis (columns) of the lift of c into one block, plus the
/// dimension of its intersection with ker K.
struct LiftedSubspace {
    int N_plus = 0;
    Matrix basis;
    Eigen::Index kernel_dimension = 0;
};

/// Empty basis when c vanishes; throws DomainError on a dimension mismatch.
LiftedSubspace lift_subspace(const ColoredSpace &space, const Vector &c, int N_plus);

/// Lift of a configuration-space orthogonal projector. Throws DomainError
/// unless P_M is Hermitian and idempotent to `tol`, or if the lifted ranges
/// of its eigenvectors fail to be orthogonal.
Matrix lift_projector(const ColoredSpace &space, const Matrix &P_M, double tol = 1e-10);

/// Eigenvalues grouped into eigenspaces; columns of `bases[k]` span eigenspace k.
struct SpectralForm {
    std::vector<Complex> values;
    std::vector<Matrix> bases;
};

/// Eigenvalues closer than merge_tol are fused into one eigenspace.
SpectralForm hermitian_spectral_form(const Matrix &H, double merge_tol = 1e-9);
SpectralForm unitary_spectral_form(const Matrix &U, double merge_tol = 1e-9);

/// sum_E E (projector onto the lift of eigenspace E) in every block.
Matrix lift_hamiltonian(const ColoredSpace &space, const Matrix &H_M, double merge_tol = 1e-9);

/// shared: one Haar fiber unitary per block, common to all eigenspaces of U_M.
/// independent: a separate Haar fiber unitary per (eigenspace, block); this
/// breaks consistency of the lifted unitary and is kept as a negative control.
enum class FiberMode { shared, independent };

/// sum_u u U_u, U_u acting inside the lift of eigenspace u. Throws DomainError
/// if the assembled operator is not unitary to 1e-10.
Matrix lift_unitary(const ColoredSpace &space, const Matrix &U_M, std::uint64_t fiber_seed,
                    FiberMode mode = FiberMode::shared, double merge_tol = 1e-9);

/// Direct sum over blocks of lambda_{N+} sum_r r rho_r, each rho_r a seeded
/// random density on the lift of eigenvector |r>. Weights are renormalized
/// and must be nonnegative with one entry per block.
Matrix lift_density(const ColoredSpace &space, const Matrix &rho_M, std::vector<double> weights,
                    std::uint64_t inner_seed);

/// Haar-distributed unitary (QR of a complex Ginibre matrix with phase fix).
Matrix haar_unitary(Eigen::Index n, Rng &rng);
/// Random full-rank density matrix G G^dag / tr.
Matrix random_density(Eigen::Index n, Rng &rng);
/// Random Hermitian matrix (G + G^dag) / 2.
Matrix random_hermitian(Eigen::Index n, Rng &rng);
Vector random_unit_vector(Eigen::Index n, Rng &rng);

/// Largest |entry| coupling different N+ blocks.
double off_block_norm(const ColoredSpace &space, const Matrix &A);

struct LemmaReport {
    int samples = 0;
    double max_deviation = 0.0;
    double tol = 0.0;
    std::uint64_t seed = 0;
    [[nodiscard]] bool passed() const { return max_deviation <= tol; }
};

/// tr[P_E |psi><psi|] against |<E|psi_M>|^2 for random lifted psi, with P_E
/// taken from the lifted Hamiltonian's own eigendecomposition (even samples)
/// or from lifted spectral projectors of a random unitary (odd samples).
LemmaReport verify_lemma_overlap(int samples, double tol, std::uint64_t seed);

/// Color-blind setup: Hamiltonian, state and coarse-graining {P_i^M}.
struct PerceivedSystem {
    int L = 0;
    int N = 0;
    Matrix H_M;
    Matrix rho_M;
    std::vector<Matrix> measurement;

    /// Random Hermitian H_M, random full-rank rho_M, and the coarse-graining by
    /// the number of particles on the first floor(L/2) sites (at least one site).
    static PerceivedSystem random(int L, int N, std::uint64_t seed);
};

struct AssumptionCheck {
    std::string name;
    std::string description;
    double deviation = 0.0;
    bool passed = true;
};

/// Actual and perceived work of one unitary, plus assumption diagnostics.
struct WorkCheck {
    double W_actual = 0.0;
    double W_perceived = 0.0;
    std::vector<AssumptionCheck> assumptions;

    [[nodiscard]] double deviation() const { return std::abs(W_actual - W_perceived); }
    /// Comma-separated names of failed assumptions, empty if none.
    [[nodiscard]] std::string violated() const;
};

/// Evaluates tr[H(rho - U rho U^dag)] against tr[H_M(rho_M - U_M rho_M U_M^dag)]
/// and tests (a2), (a3), (a5)-(a8) on the lifted objects with `probes` random
/// admissible projectors.
WorkCheck check_work(const ColoredSpace &space, const PerceivedSystem &perceived, const Matrix &U_M, const Matrix &H,
                     const Matrix &rho, const Matrix &U, Rng &probe_rng, int probes = 4, double tol = 1e-8);

/// Coarse-grained state sum_i p_i P_i / V_i.
Matrix coarse_grained_state(const PerceivedSystem &perceived);
/// Unitary sending the k-th largest eigenvector of rho_cg to the k-th lowest energy eigenvector.
Matrix extraction_unitary(const Matrix &H_M, const Matrix &rho_cg);
/// Haar unitary inside each coarse-graining subspace.
Matrix block_haar_unitary(const PerceivedSystem &perceived, Rng &rng);

struct NegativeControl {
    std::string name;
    std::string expected;  ///< assumption the control is built to break
    std::string violated;  ///< assumptions the detector reported
    double deviation = 0.0;
    [[nodiscard]] bool flagged() const { return violated.find(expected) != std::string::npos; }
};

struct WorkEqualityReport {
    int pairs = 0;
    double max_deviation = 0.0;
    double tol = 0.0;
    /// Largest spread of the actual work across fiber seeds for a fixed perceived unitary.
    double max_fiber_spread = 0.0;
    std::vector<AssumptionCheck> assumptions; ///< worst case over all pairs
    double cg_sample_mean = 0.0;
    double cg_exact = 0.0;
    double cg_standard_error = 0.0;
    bool cg_passed = false;
    std::vector<NegativeControl> controls;
    std::uint64_t seed = 0;

    [[nodiscard]] bool passed() const;
};

struct WorkEqualityOptions {
    int unitary_samples = 20;
    int fiber_samples = 3;
    double tol = 1e-8;
    std::uint64_t seed = 0;
};

WorkEqualityReport verify_work_equality(const PerceivedSystem &perceived, const WorkEqualityOptions &options);

} // namespace obsmix::lift
