#include "obsmix/lattice.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <span>
#include <string>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "parallel.hpp"

namespace obsmix::lattice {

namespace {

constexpr std::complex<double> I{0.0, 1.0};

int popcount(Mask m) { return std::popcount(m); }

Mask low_bits(int n) { return n >= 64 ? ~Mask{0} : ((Mask{1} << n) - 1); }

/// All n-bit masks with k set bits, in increasing numeric order.
std::vector<Mask> combinations(int n, int k) {
    std::vector<Mask> out;
    if (k < 0 || k > n) return out;
    if (k == 0) {
        out.push_back(0);
        return out;
    }
    const Mask limit = Mask{1} << n;
    for (Mask m = low_bits(k); m < limit;) {
        out.push_back(m);
        // Gosper's hack: next integer with the same popcount.
        const Mask c = m & (~m + 1);
        const Mask r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    return out;
}

Mask key(const Occupation &s) { return s.plus | (s.minus << 32); }

/// Sign of c^dag_i c_j on one species word: parity of particles strictly between i and j.
double hop_sign(Mask word, int i, int j) {
    const int lo = std::min(i, j);
    const int hi = std::max(i, j);
    const Mask between = low_bits(hi) & ~low_bits(lo + 1);
    return (popcount(word & between) & 1) ? -1.0 : 1.0;
}

} // namespace

Occupancy occupancy_from_string(std::string_view name) {
    if (name == "independent" || name == "independent-species") return Occupancy::independent;
    if (name == "site-exclusive" || name == "exclusive") return Occupancy::site_exclusive;
    throw ConfigError("unknown occupancy mode '" + std::string(name) + "'");
}

Statistics statistics_from_string(std::string_view name) {
    if (name == "fermion") return Statistics::fermion;
    if (name == "hard-core-boson" || name == "boson") return Statistics::hard_core_boson;
    throw ConfigError("unknown statistics '" + std::string(name) + "'");
}

std::string_view to_string(Occupancy mode) {
    return mode == Occupancy::independent ? "independent-species" : "site-exclusive";
}

std::string_view to_string(Statistics stats) { return stats == Statistics::fermion ? "fermion" : "hard-core-boson"; }

void LatticeSpec::validate() const {
    if (L_A < 0 || L_B < 0 || sites() < 1) throw DomainError("lattice needs at least one site");
    if (sites() > 32) throw DomainError("lattice has more than 32 sites");
    if (N_plus < 0 || N_minus < 0) throw DomainError("particle numbers must be nonnegative");
    if (occupancy == Occupancy::independent) {
        if (N_plus > sites() || N_minus > sites())
            throw DomainError("each species can hold at most one particle per site");
    } else if (N_plus + N_minus > sites()) {
        throw DomainError("site-exclusive lattice holds at most one particle per site");
    }
    for (double c : {couplings.t1, couplings.v1, couplings.t2, couplings.v2})
        if (!std::isfinite(c)) throw DomainError("couplings must be finite");
}

Basis Basis::build(const LatticeSpec &spec) {
    spec.validate();
    Basis b;
    b.N_plus_ = spec.N_plus;
    b.N_minus_ = spec.N_minus;
    b.sites_ = spec.sites();
    const auto plus_words = combinations(b.sites_, spec.N_plus);
    const auto minus_words = combinations(b.sites_, spec.N_minus);
    for (Mask p : plus_words)
        for (Mask m : minus_words) {
            if (spec.occupancy == Occupancy::site_exclusive && (p & m)) continue;
            b.lookup_.emplace(key({p, m}), b.states_.size());
            b.states_.push_back({p, m});
        }
    return b;
}

std::size_t Basis::index_of(const Occupation &state) const {
    const auto it = lookup_.find(key(state));
    return it == lookup_.end() ? states_.size() : it->second;
}

std::string Basis::word(std::size_t index) const {
    const auto &s = states_.at(index);
    std::string out(static_cast<std::size_t>(sites_), '0');
    for (int site = 0; site < sites_; ++site) {
        const bool p = (s.plus >> site) & 1;
        const bool m = (s.minus >> site) & 1;
        out[static_cast<std::size_t>(site)] = p && m ? '2' : p ? '+' : m ? '-' : '0';
    }
    return out;
}

SparseMatrix build_hamiltonian(const LatticeSpec &spec, const Basis &basis) {
    const int L = spec.sites();
    const auto &c = spec.couplings;
    const bool fermion = spec.statistics == Statistics::fermion;
    const bool exclusive = spec.occupancy == Occupancy::site_exclusive;
    const std::array<std::pair<int, double>, 2> hops{{{1, c.t1}, {2, c.t2}}};

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(basis.size() * static_cast<std::size_t>(4 * L + 1));

    for (std::size_t col = 0; col < basis.size(); ++col) {
        const Occupation s = basis[col];
        auto n = [&](int site) { return static_cast<double>(((s.plus >> site) & 1) + ((s.minus >> site) & 1)); };

        double diagonal = 0.0;
        for (int i = 0; i < L; ++i) {
            diagonal += c.v1 * n(i) * n((i + 1) % L);
            diagonal += c.v2 * n(i) * n((i + 2) % L);
        }

        for (int species = 0; species < 2; ++species) {
            const Mask word = species == 0 ? s.plus : s.minus;
            const Mask other = species == 0 ? s.minus : s.plus;
            // c^dag_to c_from on this species, with the resulting matrix element.
            auto hop = [&](int to, int from, double t) {
                if (!((word >> from) & 1) || ((word >> to) & 1)) return;
                if (exclusive && ((other >> to) & 1)) return;
                const Mask moved = (word & ~(Mask{1} << from)) | (Mask{1} << to);
                const Occupation target = species == 0 ? Occupation{moved, other} : Occupation{other, moved};
                const std::size_t row = basis.index_of(target);
                const double sign = fermion ? hop_sign(word, to, from) : 1.0;
                triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), t * sign);
            };
            for (const auto &[range, t] : hops) {
                if (t == 0.0) continue;
                for (int i = 0; i < L; ++i) {
                    const int j = (i + range) % L;
                    if (j == i) {
                        // The bond wraps onto itself: c^dag_i c_i + h.c. = 2 n_i.
                        diagonal += 2.0 * t * static_cast<double>((word >> i) & 1);
                        continue;
                    }
                    hop(i, j, t);
                    hop(j, i, t);
                }
            }
        }
        if (diagonal != 0.0) triplets.emplace_back(static_cast<int>(col), static_cast<int>(col), diagonal);
    }

    SparseMatrix H(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(basis.size()));
    H.setFromTriplets(triplets.begin(), triplets.end());
    H.makeCompressed();
    return H;
}

entropy::SectorPartition rick_partition(const LatticeSpec &spec, const Basis &basis) {
    const Mask left = low_bits(spec.L_A);
    std::vector<entropy::SectorKey> keys;
    keys.reserve(basis.size());
    for (const auto &s : basis.states()) keys.push_back({popcount(s.plus & left), popcount(s.minus & left)});
    return entropy::SectorPartition::from_keys(keys);
}

entropy::SectorPartition morty_partition(const LatticeSpec &spec, const Basis &basis) {
    const Mask left = low_bits(spec.L_A);
    std::vector<entropy::SectorKey> keys;
    keys.reserve(basis.size());
    for (const auto &s : basis.states()) keys.push_back({popcount(s.plus & left) + popcount(s.minus & left)});
    return entropy::SectorPartition::from_keys(keys);
}

combinatorics::RickLabel RickTarget::label(const LatticeSpec &spec) const {
    return {blue_left, spec.N_plus, blue_left + red_left, spec.particles()};
}

InitialMode initial_mode_from_string(std::string_view name) {
    if (name == "basis" || name == "basis-state") return InitialMode::basis_state;
    if (name == "haar" || name == "haar-in-macrostate") return InitialMode::haar;
    throw ConfigError("unknown initial-state mode '" + std::string(name) + "'");
}

std::string_view to_string(InitialMode mode) {
    return mode == InitialMode::basis_state ? "basis-state" : "haar-in-macrostate";
}

State initial_state(const LatticeSpec &spec, const Basis &basis, InitialMode mode, std::uint64_t seed,
                    std::optional<RickTarget> target) {
    const RickTarget goal = target.value_or(RickTarget::segregated(spec));
    const auto partition = rick_partition(spec, basis);
    const std::size_t sector = partition.find({goal.blue_left, goal.red_left});
    if (sector == partition.sectors().size())
        throw DomainError("target Rick macrostate (" + std::to_string(goal.blue_left) + ", " +
                          std::to_string(goal.red_left) + ") is empty in this block");
    const auto &members = partition.sectors()[sector].members;

    std::mt19937_64 rng(seed);
    State psi = State::Zero(static_cast<Eigen::Index>(basis.size()));
    if (mode == InitialMode::basis_state) {
        boost::random::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
        psi[static_cast<Eigen::Index>(members[pick(rng)])] = 1.0;
        return psi;
    }
    boost::random::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t b : members) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        psi[static_cast<Eigen::Index>(b)] = {re, im};
    }
    psi /= psi.norm();
    return psi;
}

Method method_from_string(std::string_view name) {
    if (name == "auto" || name == "automatic") return Method::automatic;
    if (name == "dense" || name == "dense-eigen") return Method::dense;
    if (name == "krylov") return Method::krylov;
    throw ConfigError("unknown evolution method '" + std::string(name) + "'");
}

std::string_view to_string(Method method) {
    switch (method) {
    case Method::automatic: return "auto";
    case Method::dense: return "dense-eigen";
    case Method::krylov: return "krylov";
    }
    return "?";
}

std::vector<double> EvolutionPlan::uniform_grid(int points, double t_max) {
    if (points < 1) throw DomainError("time grid needs at least one point");
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw DomainError("time grid end must be finite and nonnegative");
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) out[static_cast<std::size_t>(k)] = points == 1 ? 0.0 : t_max * k / (points - 1);
    return out;
}

void EvolutionPlan::validate() const {
    if (times.empty()) throw DomainError("empty time grid");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0) || !std::isfinite(times[k])) throw DomainError("times must be finite and nonnegative");
        if (k > 0 && !(times[k] > times[k - 1])) throw DomainError("times must be strictly increasing");
    }
    if (!(krylov_tol > 0.0)) throw DomainError("Krylov tolerance must be positive");
    if (krylov_dim < 2) throw DomainError("Krylov dimension must be at least 2");
}

State multiply(const SparseMatrix &H, const State &psi) {
    const Eigen::VectorXd re = H * psi.real();
    const Eigen::VectorXd im = H * psi.imag();
    State out(psi.size());
    out.real() = re;
    out.imag() = im;
    return out;
}

double expectation(const SparseMatrix &H, const State &psi) { return psi.dot(multiply(H, psi)).real(); }

Eigensystem diagonalize(const SparseMatrix &H) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) throw DomainError("dense eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXd eigenvalues(const SparseMatrix &H) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw DomainError("dense eigensolver failed");
    return solver.eigenvalues();
}

Evolution evolve_dense(const Eigensystem &eig, const State &psi0, const std::vector<double> &times, int threads) {
    const Eigen::VectorXd c_re = eig.vectors.transpose() * psi0.real();
    const Eigen::VectorXd c_im = eig.vectors.transpose() * psi0.imag();
    Evolution out;
    out.method = Method::dense;
    out.states.resize(times.size());
    detail::parallel_for(times.size(), threads, [&](std::size_t k) {
        const Eigen::Index n = eig.values.size();
        Eigen::VectorXd rotated_re(n), rotated_im(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::complex<double> c{c_re[j], c_im[j]};
            const std::complex<double> r = std::exp(-I * eig.values[j] * times[k]) * c;
            rotated_re[j] = r.real();
            rotated_im[j] = r.imag();
        }
        State psi(n);
        psi.real() = eig.vectors * rotated_re;
        psi.imag() = eig.vectors * rotated_im;
        out.states[k] = std::move(psi);
    });
    return out;
}

namespace {

struct KrylovStep {
    State result;
    double error = 0.0;
};

KrylovStep krylov_step(const SparseMatrix &H, const State &v, double dt, int m_max) {
    const double beta0 = v.norm();
    if (beta0 == 0.0) return {v, 0.0};
    std::vector<State> V;
    V.reserve(static_cast<std::size_t>(m_max));
    std::vector<double> alpha;
    std::vector<double> beta;
    V.push_back(v / beta0);
    double last_beta = 0.0;
    bool exhausted = false;
    int m = 0;
    for (int j = 0; j < m_max; ++j) {
        State w = multiply(H, V[static_cast<std::size_t>(j)]);
        const double a = V[static_cast<std::size_t>(j)].dot(w).real();
        alpha.push_back(a);
        w -= a * V[static_cast<std::size_t>(j)];
        if (j > 0) w -= beta[static_cast<std::size_t>(j - 1)] * V[static_cast<std::size_t>(j - 1)];
        for (const auto &u : V) w -= u.dot(w) * u;
        const double b = w.norm();
        m = j + 1;
        last_beta = b;
        if (b <= 1e-12 * (1.0 + std::abs(a))) {
            exhausted = true;
            break;
        }
        if (j + 1 < m_max) {
            beta.push_back(b);
            V.push_back(w / b);
        }
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) T(j, j) = alpha[static_cast<std::size_t>(j)];
    for (int j = 0; j + 1 < m; ++j) T(j, j + 1) = T(j + 1, j) = beta[static_cast<std::size_t>(j)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::MatrixXd &S = es.eigenvectors();
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(m);
    for (int k = 0; k < m; ++k) {
        const std::complex<double> phase = std::exp(-I * es.eigenvalues()[k] * dt) * S(0, k);
        for (int j = 0; j < m; ++j) y[j] += S(j, k) * phase;
    }

    KrylovStep out;
    out.result = State::Zero(v.size());
    for (int j = 0; j < m; ++j) out.result += (beta0 * y[j]) * V[static_cast<std::size_t>(j)];
    out.error = exhausted ? 0.0 : beta0 * last_beta * std::abs(y[m - 1]);
    return out;
}

} // namespace

Evolution evolve_krylov(const SparseMatrix &H, const State &psi0, const std::vector<double> &times, double tol,
                        int krylov_dim) {
    Evolution out;
    out.method = Method::krylov;
    out.states.reserve(times.size());
    State psi = psi0;
    double t_now = 0.0;
    double dt_trial = 0.0;
    for (double t_target : times) {
        while (t_now < t_target) {
            const double remaining = t_target - t_now;
            double dt = dt_trial > 0.0 ? std::min(dt_trial, remaining) : remaining;
            int halvings = 0;
            KrylovStep step = krylov_step(H, psi, dt, krylov_dim);
            while (step.error > tol) {
                if (++halvings > 60)
                    throw DomainError("Krylov propagation did not reach tolerance " + std::to_string(tol) +
                                      " at t = " + std::to_string(t_now) + "; achieved error estimate " +
                                      std::to_string(step.error));
                dt *= 0.5;
                step = krylov_step(H, psi, dt, krylov_dim);
            }
            psi = std::move(step.result);
            out.max_step_error = std::max(out.max_step_error, step.error);
            ++out.substeps;
            t_now = dt == remaining ? t_target : t_now + dt;
            dt_trial = halvings > 0 ? dt : 2.0 * dt;
        }
        out.states.push_back(psi);
    }
    return out;
}

Evolution evolve(const SparseMatrix &H, const State &psi0, const EvolutionPlan &plan) {
    plan.validate();
    const auto n = static_cast<std::size_t>(H.rows());
    const bool dense = plan.method == Method::dense || (plan.method == Method::automatic && n <= plan.dense_threshold);
    if (dense) return evolve_dense(diagonalize(H), psi0, plan.times, plan.threads);
    return evolve_krylov(H, psi0, plan.times, plan.krylov_tol, plan.krylov_dim);
}

namespace {

std::vector<double> to_vector(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

std::span<const std::complex<double>> as_span(const State &psi) {
    return {psi.data(), static_cast<std::size_t>(psi.size())};
}

struct Expanded {
    double exact = 0.0;
    double dW0 = 0.0;
    double dW1 = 0.0;
    double dW2 = 0.0;
    thermo::WorkAverages averages{};
    double beta_M = 0.0;
};

/// Rick at S_R, Morty at S_M >= S_R; expansions are taken at Morty's point.
Expanded work_differences(const thermo::Spectrum &spectrum, double S_M, double S_R, double tol) {
    Expanded out;
    const double beta_R = thermo::solve_beta_for_entropy(spectrum, S_R, tol);
    out.beta_M = thermo::solve_beta_for_entropy(spectrum, S_M, tol);
    const auto morty = thermo::thermal_stats(spectrum, out.beta_M);
    out.exact = morty.mean_E - thermo::thermal_stats(spectrum, beta_R).mean_E;
    const double dS = S_M - S_R;
    if (dS == 0.0) return out;
    out.dW0 = thermo::work_difference_expansion(morty, dS, 0);
    out.dW1 = thermo::work_difference_expansion(morty, dS, 1);
    out.dW2 = thermo::work_difference_expansion(morty, dS, 2);
    out.averages = thermo::work_difference_averages(out.dW0, out.dW1, out.dW2);
    return out;
}

} // namespace

thermo::Spectrum block_spectrum(const LatticeSpec &spec, std::size_t spectrum_limit) {
    const Basis basis = Basis::build(spec);
    if (basis.size() > spectrum_limit)
        throw DomainError("block dimension " + std::to_string(basis.size()) + " exceeds the spectrum limit " +
                          std::to_string(spectrum_limit));
    return thermo::Spectrum::from_eigenvalues(to_vector(eigenvalues(build_hamiltonian(spec, basis))));
}

TimeSeries run_mixing_timeseries(const LatticeSpec &spec, const EvolutionPlan &plan,
                                 std::optional<RickTarget> target) {
    plan.validate();
    const Basis basis = Basis::build(spec);
    const SparseMatrix H = build_hamiltonian(spec, basis);
    const auto rick = rick_partition(spec, basis);
    const auto morty = morty_partition(spec, basis);
    const State psi0 = initial_state(spec, basis, plan.initial, plan.seed, target);

    const std::size_t n = basis.size();
    if (n > plan.spectrum_limit)
        throw DomainError("block dimension " + std::to_string(n) + " exceeds the spectrum limit " +
                          std::to_string(plan.spectrum_limit));

    TimeSeries out;
    out.dimension = n;
    const bool dense = plan.method == Method::dense || (plan.method == Method::automatic && n <= plan.dense_threshold);
    Evolution evolution;
    std::vector<double> levels;
    if (dense) {
        const Eigensystem eig = diagonalize(H);
        levels = to_vector(eig.values);
        evolution = evolve_dense(eig, psi0, plan.times, plan.threads);
    } else {
        levels = to_vector(eigenvalues(H));
        evolution = evolve_krylov(H, psi0, plan.times, plan.krylov_tol, plan.krylov_dim);
    }
    out.method = evolution.method;
    out.max_step_error = evolution.max_step_error;

    const auto spectrum = thermo::Spectrum::from_eigenvalues(std::move(levels));
    const auto goal = target.value_or(RickTarget::segregated(spec));
    out.S_init = std::log(static_cast<double>(rick.sectors()[rick.find({goal.blue_left, goal.red_left})].volume()));
    out.S_fin = std::log(static_cast<double>(n));
    out.E0 = expectation(H, psi0);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.records.resize(plan.times.size());
    for (std::size_t k = 0; k < plan.times.size(); ++k) {
        const State &psi = evolution.states[k];
        auto &rec = out.records[k];
        rec.t = plan.times[k];
        try {
            rec.S_rick = entropy::observational_entropy(entropy::sector_probabilities(as_span(psi), rick), rick);
            rec.S_morty1 = entropy::observational_entropy(entropy::sector_probabilities(as_span(psi), morty), morty);
            rec.E_mean = expectation(H, psi);
            rec.beta_obs = thermo::solve_beta_for_entropy(spectrum, rec.S_rick);
            rec.W = out.E0 - thermo::thermal_stats(spectrum, rec.beta_obs).mean_E;
        } catch (const DomainError &e) {
            throw DomainError("time index " + std::to_string(k) + " (t = " + std::to_string(rec.t) + "): " + e.what());
        }
        // Coarsening never lowers the entropy; rounding can, by an ulp.
        const double S_M = std::max(rec.S_morty1, rec.S_rick);
        try {
            const auto w = work_differences(spectrum, S_M, rec.S_rick, 1e-10);
            rec.dW_exact = w.exact;
            rec.dW_av = w.averages.average;
            rec.dW_av2 = w.averages.smart_average;
        } catch (const DomainError &) {
            // Morty at infinite temperature: the expansion has no finite kT.
            rec.dW_exact = nan;
            rec.dW_av = nan;
            rec.dW_av2 = nan;
        }
    }
    return out;
}

std::vector<ScanPoint> symmetric_ladder(const std::vector<int> &L_values, int n) {
    std::vector<ScanPoint> out;
    for (int L : L_values) {
        if (L % 2 != 0) throw DomainError("symmetric ladder needs even L");
        out.push_back({L / 2, L / 2, n, n});
    }
    return out;
}

std::vector<ScanPoint> asymmetric_ladder(const std::vector<int> &L_A_values, int N_A, int N_B) {
    if (N_A <= 0) throw DomainError("asymmetric ladder needs N_A > 0");
    std::vector<ScanPoint> out;
    for (int L_A : L_A_values) out.push_back({L_A, (N_B * L_A) / N_A, N_A, N_B});
    return out;
}

std::vector<ScanRecord> run_static_scan(const std::vector<ScanPoint> &points, const ScanOptions &options) {
    std::vector<ScanRecord> out(points.size());
    detail::parallel_for(points.size(), options.threads, [&](std::size_t k) {
        ScanRecord &rec = out[k];
        rec.point = points[k];
        try {
            LatticeSpec spec;
            spec.L_A = rec.point.L_A;
            spec.L_B = rec.point.L_B;
            spec.N_plus = rec.point.N_A;
            spec.N_minus = rec.point.N_B;
            spec.couplings = options.couplings;
            spec.occupancy = options.occupancy;
            spec.statistics = options.statistics;
            const Basis basis = Basis::build(spec);
            rec.dim_block = basis.size();

            const auto rick = rick_partition(spec, basis);
            const auto morty = morty_partition(spec, basis);
            const auto goal = RickTarget::segregated(spec);
            const std::size_t r = rick.find({goal.blue_left, goal.red_left});
            const std::size_t m = morty.find({goal.blue_left + goal.red_left});
            if (r == rick.sectors().size()) throw DomainError("segregated Rick macrostate is empty");
            const double S_R = std::log(static_cast<double>(rick.sectors()[r].volume()));
            const double S_M = std::log(static_cast<double>(morty.sectors()[m].volume()));
            rec.dS = S_M - S_R;

            if (basis.size() > options.spectrum_limit)
                throw DomainError("block dimension " + std::to_string(basis.size()) +
                                  " exceeds the spectrum limit " + std::to_string(options.spectrum_limit));
            const auto spectrum =
                thermo::Spectrum::from_eigenvalues(to_vector(eigenvalues(build_hamiltonian(spec, basis))));
            const auto w = work_differences(spectrum, S_M, S_R, options.solver_tol);
            rec.T_obs = w.beta_M > 0.0 ? 1.0 / w.beta_M : std::numeric_limits<double>::infinity();
            rec.dW_exact = w.exact;
            rec.dW0 = w.dW0;
            rec.dW1 = w.dW1;
            rec.dW2 = w.dW2;
            rec.dW_av = w.averages.average;
            rec.dW_av2 = w.averages.smart_average;
        } catch (const DomainError &e) {
            rec.error = e.what();
        }
    });
    return out;
}

} // namespace obsmix::lattice
