#include "obsmix/lift.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace obsmix::lift {

namespace {

double max_abs(const Matrix &A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix(splitmix(splitmix(seed) ^ a) ^ (b + 0x632be59bd9b4e019ULL));
}

Complex gaussian(Rng &rng) {
    boost::random::normal_distribution<double> g(0.0, 1.0);
    const double re = g(rng);
    const double im = g(rng);
    return Complex{re, im} / std::sqrt(2.0);
}

Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
    Matrix G(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) G(i, j) = gaussian(rng);
    return G;
}

/// Columns of `basis` lifted into block N+, ordered (column j, coloring).
Matrix lift_columns(const ColoredSpace &space, const Matrix &basis, int N_plus) {
    const Eigen::Index m = space.fiber_dimension(N_plus);
    Matrix out = Matrix::Zero(space.dimension(), basis.cols() * m);
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        const auto lifted = lift_subspace(space, basis.col(j), N_plus);
        if (lifted.basis.cols() == 0) throw DomainError("cannot lift a zero eigenvector");
        out.middleCols(j * m, m) = lifted.basis;
    }
    return out;
}

/// Block-diagonal matrix with k copies of W.
Matrix repeat_diagonal(const Matrix &W, Eigen::Index k) {
    const Eigen::Index m = W.rows();
    Matrix out = Matrix::Zero(k * m, k * m);
    for (Eigen::Index j = 0; j < k; ++j) out.block(j * m, j * m, m, m) = W;
    return out;
}

Matrix range_basis(const Matrix &P) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(P);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
    Matrix B(P.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) B.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
    return B;
}


} // namespace

ConfigurationSpace::ConfigurationSpace(int L, int N) : L_(L), N_(N) {
    if (L < 1 || L > 20) throw DomainError("configuration space needs 1 <= L <= 20");
    if (N < 0 || N > L) throw DomainError("configuration space needs 0 <= N <= L");
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << L); ++m)
        if (std::popcount(m) == N) masks_.push_back(m);
}

Eigen::Index ConfigurationSpace::index_of(std::uint64_t mask) const {
    const auto it = std::lower_bound(masks_.begin(), masks_.end(), mask);
    if (it == masks_.end() || *it != mask) throw InvalidLabel("configuration is not in this space");
    return static_cast<Eigen::Index>(it - masks_.begin());
}

std::string ConfigurationSpace::word(Eigen::Index x) const {
    const std::uint64_t m = mask(x);
    std::string out(static_cast<std::size_t>(L_), '0');
    for (int s = 0; s < L_; ++s)
        if ((m >> s) & 1) out[static_cast<std::size_t>(s)] = '1';
    return out;
}

Eigen::Index ConfigurationSpace::index_of_word(const std::string &word) const {
    if (static_cast<int>(word.size()) != L_) throw InvalidLabel("configuration word has the wrong length");
    std::uint64_t m = 0;
    for (int s = 0; s < L_; ++s) {
        const char ch = word[static_cast<std::size_t>(s)];
        if (ch == '1')
            m |= std::uint64_t{1} << s;
        else if (ch != '0')
            throw InvalidLabel("configuration words use only 0 and 1");
    }
    return index_of(m);
}

ColoredSpace::ColoredSpace(int L, int N) : config_(L, N) {
    for (int Np = 0; Np <= N; ++Np) {
        std::string w = std::string(static_cast<std::size_t>(Np), '+') + std::string(static_cast<std::size_t>(N - Np), '-');
        std::vector<std::string> words;
        do {
            words.push_back(w);
        } while (std::next_permutation(w.begin(), w.end()));
        offsets_.push_back(dimension_);
        dimension_ += config_.dimension() * static_cast<Eigen::Index>(words.size());
        colorings_.push_back(std::move(words));
    }
}

Eigen::Index ColoredSpace::block_offset(int N_plus) const {
    if (N_plus < 0 || N_plus > particles()) throw InvalidLabel("no such color block");
    return offsets_[static_cast<std::size_t>(N_plus)];
}

Eigen::Index ColoredSpace::fiber_dimension(int N_plus) const {
    if (N_plus < 0 || N_plus > particles()) throw InvalidLabel("no such color block");
    return static_cast<Eigen::Index>(colorings_[static_cast<std::size_t>(N_plus)].size());
}

Eigen::Index ColoredSpace::block_dimension(int N_plus) const {
    return config_.dimension() * fiber_dimension(N_plus);
}

Eigen::Index ColoredSpace::index(int N_plus, Eigen::Index x, Eigen::Index coloring) const {
    const Eigen::Index m = fiber_dimension(N_plus);
    if (x < 0 || x >= config_.dimension() || coloring < 0 || coloring >= m)
        throw InvalidLabel("colored index out of range");
    return block_offset(N_plus) + x * m + coloring;
}

int ColoredSpace::block_of(Eigen::Index index) const {
    if (index < 0 || index >= dimension_) throw InvalidLabel("colored index out of range");
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
    return static_cast<int>(it - offsets_.begin()) - 1;
}

const std::string &ColoredSpace::coloring(int N_plus, Eigen::Index coloring) const {
    return colorings_.at(static_cast<std::size_t>(N_plus)).at(static_cast<std::size_t>(coloring));
}

std::string ColoredSpace::word(Eigen::Index index) const {
    const int Np = block_of(index);
    const Eigen::Index local = index - block_offset(Np);
    const Eigen::Index m = fiber_dimension(Np);
    const std::string cfg = config_.word(local / m);
    const std::string &colors = coloring(Np, local % m);
    std::string out = cfg;
    std::size_t next = 0;
    for (char &ch : out)
        if (ch == '1') ch = colors[next++];
    return out;
}

Eigen::Index ColoredSpace::index_of_word(const std::string &word) const {
    std::string cfg;
    std::string colors;
    for (char ch : word) {
        if (ch == '0') {
            cfg.push_back('0');
        } else if (ch == '+' || ch == '-') {
            cfg.push_back('1');
            colors.push_back(ch);
        } else {
            throw InvalidLabel("colored words use only 0, + and -");
        }
    }
    const Eigen::Index x = config_.index_of_word(cfg);
    const int Np = static_cast<int>(std::count(colors.begin(), colors.end(), '+'));
    const auto &words = colorings_[static_cast<std::size_t>(Np)];
    const auto it = std::lower_bound(words.begin(), words.end(), colors);
    return index(Np, x, static_cast<Eigen::Index>(it - words.begin()));
}

Matrix ColoredSpace::erasure() const {
    Matrix K = Matrix::Zero(config_.dimension(), dimension_);
    for (int Np = 0; Np <= particles(); ++Np)
        for (Eigen::Index x = 0; x < config_.dimension(); ++x)
            for (Eigen::Index c = 0; c < fiber_dimension(Np); ++c) K(x, index(Np, x, c)) = 1.0;
    return K;
}

Matrix ColoredSpace::block_projector(int N_plus) const {
    Matrix P = Matrix::Zero(dimension_, dimension_);
    const Eigen::Index off = block_offset(N_plus);
    for (Eigen::Index i = 0; i < block_dimension(N_plus); ++i) P(off + i, off + i) = 1.0;
    return P;
}

LiftedSubspace lift_subspace(const ColoredSpace &space, const Vector &c, int N_plus) {
    const auto &cfg = space.configurations();
    if (c.size() != cfg.dimension()) throw DomainError("configuration vector has the wrong dimension");
    LiftedSubspace out;
    out.N_plus = N_plus;
    const double norm = c.norm();
    const Eigen::Index m = space.fiber_dimension(N_plus);
    if (norm == 0.0) {
        out.basis = Matrix::Zero(space.dimension(), 0);
        return out;
    }
    out.basis = Matrix::Zero(space.dimension(), m);
    for (Eigen::Index sigma = 0; sigma < m; ++sigma)
        for (Eigen::Index x = 0; x < cfg.dimension(); ++x)
            if (c[x] != Complex{0.0, 0.0}) out.basis(space.index(N_plus, x, sigma), sigma) = c[x] / norm;

    const Matrix image = space.erasure() * out.basis;
    Eigen::ColPivHouseholderQR<Matrix> qr(image);
    qr.setThreshold(1e-10);
    out.kernel_dimension = m - qr.rank();
    return out;
}

Matrix lift_projector(const ColoredSpace &space, const Matrix &P_M, double tol) {
    const Eigen::Index d = space.configurations().dimension();
    if (P_M.rows() != d || P_M.cols() != d) throw DomainError("projector has the wrong dimension");
    if (max_abs(P_M - P_M.adjoint()) > tol) throw DomainError("projector is not Hermitian");
    if (max_abs(P_M * P_M - P_M) > tol) throw DomainError("projector is not idempotent");
    const Matrix range = range_basis(P_M);
    Matrix P = Matrix::Zero(space.dimension(), space.dimension());
    for (int Np = 0; Np < space.blocks(); ++Np) {
        const Matrix B = lift_columns(space, range, Np);
        if (max_abs(B.adjoint() * B - Matrix::Identity(B.cols(), B.cols())) > 1e-9)
            throw DomainError("lifted ranges of the projector are not orthogonal");
        P += B * B.adjoint();
    }
    return P;
}

SpectralForm hermitian_spectral_form(const Matrix &H, double merge_tol) {
    if (H.rows() != H.cols()) throw DomainError("operator is not square");
    if (max_abs(H - H.adjoint()) > 1e-10 * std::max(1.0, max_abs(H))) throw DomainError("operator is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    SpectralForm out;
    const auto &ev = es.eigenvalues();
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= ev.size(); ++i) {
        if (i < ev.size() && ev[i] - ev[i - 1] <= merge_tol * std::max(1.0, std::abs(ev[i]))) continue;
        out.values.emplace_back(ev.segment(start, i - start).mean(), 0.0);
        out.bases.push_back(es.eigenvectors().middleCols(start, i - start));
        start = i;
    }
    return out;
}

SpectralForm unitary_spectral_form(const Matrix &U, double merge_tol) {
    if (U.rows() != U.cols()) throw DomainError("operator is not square");
    if (max_abs(U.adjoint() * U - Matrix::Identity(U.rows(), U.cols())) > 1e-9)
        throw DomainError("operator is not unitary");
    Eigen::ComplexSchur<Matrix> schur(U);
    const Matrix &T = schur.matrixT();
    const Matrix &Q = schur.matrixU();
    const Eigen::Index n = U.rows();
    const Matrix strict = T.triangularView<Eigen::StrictlyUpper>();
    if (max_abs(strict) > 1e-8) throw DomainError("unitary has a non-diagonal Schur form");
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    SpectralForm out;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        std::vector<Eigen::Index> members;
        for (Eigen::Index j = i; j < n; ++j)
            if (!used[static_cast<std::size_t>(j)] && std::abs(T(j, j) - T(i, i)) <= merge_tol) {
                members.push_back(j);
                used[static_cast<std::size_t>(j)] = true;
            }
        Matrix B(n, static_cast<Eigen::Index>(members.size()));
        Complex mean{0.0, 0.0};
        for (std::size_t k = 0; k < members.size(); ++k) {
            B.col(static_cast<Eigen::Index>(k)) = Q.col(members[k]);
            mean += T(members[k], members[k]);
        }
        mean /= static_cast<double>(members.size());
        out.values.push_back(mean / std::abs(mean));
        out.bases.push_back(std::move(B));
    }
    return out;
}

Matrix lift_hamiltonian(const ColoredSpace &space, const Matrix &H_M, double merge_tol) {
    const Eigen::Index d = space.configurations().dimension();
    if (H_M.rows() != d || H_M.cols() != d) throw DomainError("Hamiltonian has the wrong dimension");
    const auto form = hermitian_spectral_form(H_M, merge_tol);
    Matrix H = Matrix::Zero(space.dimension(), space.dimension());
    for (int Np = 0; Np < space.blocks(); ++Np)
        for (std::size_t g = 0; g < form.values.size(); ++g) {
            const Matrix B = lift_columns(space, form.bases[g], Np);
            H += form.values[g].real() * (B * B.adjoint());
        }
    return H;
}

Matrix lift_unitary(const ColoredSpace &space, const Matrix &U_M, std::uint64_t fiber_seed, FiberMode mode,
                    double merge_tol) {
    const Eigen::Index d = space.configurations().dimension();
    if (U_M.rows() != d || U_M.cols() != d) throw DomainError("unitary has the wrong dimension");
    const auto form = unitary_spectral_form(U_M, merge_tol);
    Rng rng(fiber_seed);
    Matrix U = Matrix::Zero(space.dimension(), space.dimension());
    for (int Np = 0; Np < space.blocks(); ++Np) {
        const Eigen::Index m = space.fiber_dimension(Np);
        const Matrix shared = haar_unitary(m, rng);
        for (std::size_t g = 0; g < form.values.size(); ++g) {
            const Matrix W = mode == FiberMode::shared ? shared : haar_unitary(m, rng);
            const Matrix B = lift_columns(space, form.bases[g], Np);
            U += form.values[g] * (B * repeat_diagonal(W, form.bases[g].cols()) * B.adjoint());
        }
    }
    if (max_abs(U.adjoint() * U - Matrix::Identity(U.rows(), U.cols())) > 1e-10)
        throw DomainError("lifted operator is not unitary");
    return U;
}

Matrix lift_density(const ColoredSpace &space, const Matrix &rho_M, std::vector<double> weights,
                    std::uint64_t inner_seed) {
    const Eigen::Index d = space.configurations().dimension();
    if (rho_M.rows() != d || rho_M.cols() != d) throw DomainError("density has the wrong dimension");
    if (static_cast<int>(weights.size()) != space.blocks()) throw DomainError("need one weight per color block");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw DomainError("block weights must be nonnegative");
        total += w;
    }
    if (!(total > 0.0)) throw DomainError("block weights sum to zero");
    for (double &w : weights) w /= total;
    if (std::abs(rho_M.trace().real() - 1.0) > 1e-10) throw DomainError("perceived density does not have unit trace");

    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_M);
    if (es.eigenvalues().minCoeff() < -1e-12) throw DomainError("perceived density is not positive");
    Rng rng(inner_seed);
    Matrix rho = Matrix::Zero(space.dimension(), space.dimension());
    for (int Np = 0; Np < space.blocks(); ++Np) {
        const Eigen::Index m = space.fiber_dimension(Np);
        for (Eigen::Index j = 0; j < d; ++j) {
            const Matrix sigma = random_density(m, rng);
            const double r = std::max(0.0, es.eigenvalues()[j]);
            const Matrix B = lift_columns(space, es.eigenvectors().col(j), Np);
            rho += (weights[static_cast<std::size_t>(Np)] * r) * (B * sigma * B.adjoint());
        }
    }
    return rho;
}

Matrix haar_unitary(Eigen::Index n, Rng &rng) {
    const Matrix G = ginibre(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix &R = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        const Complex r = R(j, j);
        if (std::abs(r) > 0.0) Q.col(j) *= r / std::abs(r);
    }
    return Q;
}

Matrix random_density(Eigen::Index n, Rng &rng) {
    const Matrix G = ginibre(n, n, rng);
    Matrix rho = G * G.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

Matrix random_hermitian(Eigen::Index n, Rng &rng) {
    const Matrix G = ginibre(n, n, rng);
    return 0.5 * (G + G.adjoint());
}

Vector random_unit_vector(Eigen::Index n, Rng &rng) {
    Vector v = ginibre(n, 1, rng).col(0);
    return v / v.norm();
}

double off_block_norm(const ColoredSpace &space, const Matrix &A) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            if (space.block_of(i) != space.block_of(j)) worst = std::max(worst, std::abs(A(i, j)));
    return worst;
}

LemmaReport verify_lemma_overlap(int samples, double tol, std::uint64_t seed) {
    static constexpr std::array<std::pair<int, int>, 5> shapes{{{2, 1}, {3, 1}, {3, 2}, {4, 2}, {4, 3}}};
    LemmaReport report;
    report.samples = samples;
    report.tol = tol;
    report.seed = seed;
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        const auto [L, N] = shapes[static_cast<std::size_t>(s) % shapes.size()];
        const ColoredSpace space(L, N);
        const Eigen::Index d = space.configurations().dimension();
        boost::random::uniform_int_distribution<int> pick_block(0, N);
        const int Np = pick_block(rng);
        const Eigen::Index off = space.block_offset(Np);
        const Eigen::Index bd = space.block_dimension(Np);

        const Vector psi_M = random_unit_vector(d, rng);
        const auto lifted = lift_subspace(space, psi_M, Np);
        const Vector phi = random_unit_vector(lifted.basis.cols(), rng);
        const Vector psi = lifted.basis * phi;

        if (s % 2 == 0) {
            const Matrix H_M = random_hermitian(d, rng);
            const auto perceived = hermitian_spectral_form(H_M);
            const Matrix H = lift_hamiltonian(space, H_M);
            const auto actual = hermitian_spectral_form(H.block(off, off, bd, bd));
            for (std::size_t g = 0; g < actual.values.size(); ++g) {
                const double lhs = (actual.bases[g].adjoint() * psi.segment(off, bd)).squaredNorm();
                double rhs = -1.0;
                for (std::size_t h = 0; h < perceived.values.size(); ++h)
                    if (std::abs(perceived.values[h] - actual.values[g]) <= 1e-8 * std::max(1.0, std::abs(actual.values[g])))
                        rhs = (perceived.bases[h].adjoint() * psi_M).squaredNorm();
                report.max_deviation = std::max(report.max_deviation, rhs < 0.0 ? 1.0 : std::abs(lhs - rhs));
            }
        } else {
            const Matrix U_M = haar_unitary(d, rng);
            const auto form = unitary_spectral_form(U_M);
            for (std::size_t g = 0; g < form.values.size(); ++g) {
                const Matrix P = lift_projector(space, form.bases[g] * form.bases[g].adjoint());
                const double lhs = psi.dot(P * psi).real();
                const double rhs = (form.bases[g].adjoint() * psi_M).squaredNorm();
                report.max_deviation = std::max(report.max_deviation, std::abs(lhs - rhs));
            }
        }
    }
    return report;
}

PerceivedSystem PerceivedSystem::random(int L, int N, std::uint64_t seed) {
    const ConfigurationSpace cfg(L, N);
    const Eigen::Index d = cfg.dimension();
    Rng rng(seed);
    PerceivedSystem out;
    out.L = L;
    out.N = N;
    out.H_M = random_hermitian(d, rng);
    out.rho_M = random_density(d, rng);
    const int left = std::max(1, L / 2);
    const std::uint64_t left_mask = (std::uint64_t{1} << left) - 1;
    std::vector<int> keys(static_cast<std::size_t>(d));
    for (Eigen::Index x = 0; x < d; ++x) keys[static_cast<std::size_t>(x)] = std::popcount(cfg.mask(x) & left_mask);
    for (int k = 0; k <= N; ++k) {
        Matrix P = Matrix::Zero(d, d);
        bool any = false;
        for (Eigen::Index x = 0; x < d; ++x)
            if (keys[static_cast<std::size_t>(x)] == k) {
                P(x, x) = 1.0;
                any = true;
            }
        if (any) out.measurement.push_back(std::move(P));
    }
    return out;
}

std::string WorkCheck::violated() const {
    std::string out;
    for (const auto &a : assumptions)
        if (!a.passed) out += (out.empty() ? "" : ",") + a.name;
    return out;
}

WorkCheck check_work(const ColoredSpace &space, const PerceivedSystem &perceived, const Matrix &U_M, const Matrix &H,
                     const Matrix &rho, const Matrix &U, Rng &probe_rng, int probes, double tol) {
    const Eigen::Index d = space.configurations().dimension();
    const Eigen::Index n = space.dimension();
    WorkCheck out;
    const Matrix evolved = U * rho * U.adjoint();
    const Matrix evolved_M = U_M * perceived.rho_M * U_M.adjoint();
    out.W_actual = (H * (rho - evolved)).trace().real();
    out.W_perceived = (perceived.H_M * (perceived.rho_M - evolved_M)).trace().real();

    std::vector<Matrix> admissible = perceived.measurement;
    boost::random::uniform_int_distribution<Eigen::Index> pick_rank(1, std::max<Eigen::Index>(1, d - 1));
    for (int p = 0; p < probes; ++p) {
        const Matrix Q = haar_unitary(d, probe_rng);
        const Eigen::Index r = pick_rank(probe_rng);
        admissible.push_back(Q.leftCols(r) * Q.leftCols(r).adjoint());
    }
    double before = 0.0;
    double after = 0.0;
    for (const auto &P_M : admissible) {
        const Matrix P = lift_projector(space, P_M);
        before = std::max(before, std::abs((rho * P).trace() - (perceived.rho_M * P_M).trace()));
        after = std::max(after, std::abs((evolved * P).trace() - (evolved_M * P_M).trace()));
    }

    Eigen::SelfAdjointEigenSolver<Matrix> rho_es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    const double a5 = std::max({off_block_norm(space, rho), std::abs(rho.trace().real() - 1.0),
                                max_abs(rho - rho.adjoint()), std::max(0.0, -rho_es.eigenvalues().minCoeff())});
    const double a6 = std::max(off_block_norm(space, U), max_abs(U.adjoint() * U - Matrix::Identity(n, n)));
    const double a7 = std::max(off_block_norm(space, H), max_abs(H - H.adjoint()));
    const double a8 = max_abs(H - lift_hamiltonian(space, perceived.H_M));

    auto add = [&](std::string name, std::string description, double deviation) {
        out.assumptions.push_back({std::move(name), std::move(description), deviation, deviation <= tol});
    };
    add("(a2)", "state consistent with admissible measurements", before);
    add("(a3)", "unitary consistent with admissible measurements", after);
    add("(a5)", "state respects superselection", a5);
    add("(a6)", "unitary respects superselection", a6);
    add("(a7)", "Hamiltonian conserves each color", a7);
    add("(a8)", "Hamiltonian depends on configuration only", a8);
    return out;
}

Matrix coarse_grained_state(const PerceivedSystem &perceived) {
    Matrix out = Matrix::Zero(perceived.rho_M.rows(), perceived.rho_M.cols());
    for (const auto &P : perceived.measurement) {
        const Complex p = (P * perceived.rho_M).trace();
        const double V = P.trace().real();
        out += (p / V) * P;
    }
    return out;
}

Matrix extraction_unitary(const Matrix &H_M, const Matrix &rho_cg) {
    Eigen::SelfAdjointEigenSolver<Matrix> energy(H_M);
    Eigen::SelfAdjointEigenSolver<Matrix> weights(rho_cg);
    const Eigen::Index d = H_M.rows();
    Matrix U = Matrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k)
        U += energy.eigenvectors().col(k) * weights.eigenvectors().col(d - 1 - k).adjoint();
    return U;
}

Matrix block_haar_unitary(const PerceivedSystem &perceived, Rng &rng) {
    const Eigen::Index d = perceived.H_M.rows();
    Matrix U = Matrix::Zero(d, d);
    for (const auto &P : perceived.measurement) {
        const Matrix B = range_basis(P);
        U += B * haar_unitary(B.cols(), rng) * B.adjoint();
    }
    return U;
}

bool WorkEqualityReport::passed() const {
    if (pairs < 1 || max_deviation > tol || !cg_passed) return false;
    for (const auto &a : assumptions)
        if (!a.passed) return false;
    for (const auto &c : controls)
        if (!c.flagged()) return false;
    return true;
}

WorkEqualityReport verify_work_equality(const PerceivedSystem &perceived, const WorkEqualityOptions &options) {
    const ColoredSpace space(perceived.L, perceived.N);
    WorkEqualityReport report;
    report.tol = options.tol;
    report.seed = options.seed;
    Rng rng(options.seed);

    const Matrix H = lift_hamiltonian(space, perceived.H_M);
    const Matrix rho_cg = coarse_grained_state(perceived);
    const Matrix U_ext = extraction_unitary(perceived.H_M, rho_cg);
    const std::vector<double> weights(static_cast<std::size_t>(space.blocks()), 1.0);
    report.cg_exact = (perceived.H_M * (perceived.rho_M - U_ext * rho_cg * U_ext.adjoint())).trace().real();

    std::vector<double> perceived_work;
    for (int s = 0; s < options.unitary_samples; ++s) {
        const Matrix U_M = U_ext * block_haar_unitary(perceived, rng);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int f = 0; f < options.fiber_samples; ++f) {
            const std::uint64_t fiber = derive_seed(options.seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(f));
            const Matrix rho = lift_density(space, perceived.rho_M, weights, fiber);
            const Matrix U = lift_unitary(space, U_M, splitmix(fiber), FiberMode::shared);
            const auto check = check_work(space, perceived, U_M, H, rho, U, rng, 4, options.tol);
            ++report.pairs;
            report.max_deviation = std::max(report.max_deviation, check.deviation());
            lo = std::min(lo, check.W_actual);
            hi = std::max(hi, check.W_actual);
            if (report.assumptions.empty()) report.assumptions = check.assumptions;
            for (std::size_t a = 0; a < check.assumptions.size(); ++a) {
                auto &worst = report.assumptions[a];
                worst.deviation = std::max(worst.deviation, check.assumptions[a].deviation);
                worst.passed = worst.passed && check.assumptions[a].passed;
            }
            if (f == 0) perceived_work.push_back(check.W_perceived);
        }
        if (options.fiber_samples > 0) report.max_fiber_spread = std::max(report.max_fiber_spread, hi - lo);
    }

    if (!perceived_work.empty()) {
        const double n = static_cast<double>(perceived_work.size());
        const double mean = std::accumulate(perceived_work.begin(), perceived_work.end(), 0.0) / n;
        double var = 0.0;
        for (double w : perceived_work) var += (w - mean) * (w - mean);
        var = perceived_work.size() > 1 ? var / (n - 1.0) : 0.0;
        report.cg_sample_mean = mean;
        report.cg_standard_error = std::sqrt(var / n);
        report.cg_passed = std::abs(mean - report.cg_exact) <= 5.0 * report.cg_standard_error + 1e-12;
    }

    // Negative controls share one perceived unitary and fiber seed.
    const Matrix U_M = U_ext * block_haar_unitary(perceived, rng);
    const std::uint64_t fiber = derive_seed(options.seed, 0xC0FFEEULL, 0);
    const Matrix rho = lift_density(space, perceived.rho_M, weights, fiber);
    {
        Matrix colored = H;
        for (Eigen::Index i = 0; i < space.dimension(); ++i)
            if (space.word(i).front() == '+') colored(i, i) += 0.5;
        const Matrix U = lift_unitary(space, U_M, splitmix(fiber), FiberMode::shared);
        const auto check = check_work(space, perceived, U_M, colored, rho, U, rng, 4, options.tol);
        report.controls.push_back({"color-dependent Hamiltonian", "(a8)", check.violated(), check.deviation()});
    }
    {
        const Matrix U = lift_unitary(space, U_M, splitmix(fiber), FiberMode::independent);
        const auto check = check_work(space, perceived, U_M, H, rho, U, rng, 4, options.tol);
        report.controls.push_back({"independent fiber unitaries", "(a3)", check.violated(), check.deviation()});
    }
    return report;
}

} // namespace obsmix::lift
