#include "paristf/models/hmm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace paristf {

namespace {

std::atomic<uint64_t> next_instance_id{1};

int state_index(std::span<const double> x) { return static_cast<int>(x[0]); }

void validate_tables(const Matrix& Q, const Matrix& G, const Vec& chi) {
    const int m = Q.rows;
    if (Q.cols != m || G.rows != m || static_cast<int>(chi.size()) != m)
        throw InadmissibleParameter("hmm: table shape mismatch");
    for (int i = 0; i < m; ++i) {
        double qs = 0.0, gs = 0.0;
        for (int j = 0; j < m; ++j) {
            if (!(Q(i, j) > 0.0)) throw InadmissibleParameter("hmm: Q entries must be strictly positive");
            qs += Q(i, j);
        }
        for (int j = 0; j < G.cols; ++j) {
            if (G(i, j) < 0.0) throw InadmissibleParameter("hmm: G entries must be nonnegative");
            gs += G(i, j);
        }
        if (std::abs(qs - 1.0) > 1e-12) throw InadmissibleParameter("hmm: Q rows must sum to 1");
        // G rows are emission likelihoods; they need not be normalized, but a
        // state must be able to emit something
        if (!(gs > 0.0)) throw InadmissibleParameter("hmm: G rows must have positive mass");
    }
    double cs = 0.0;
    for (double c : chi) {
        if (c < 0.0) throw InadmissibleParameter("hmm: chi entries must be nonnegative");
        cs += c;
    }
    if (std::abs(cs - 1.0) > 1e-12) throw InadmissibleParameter("hmm: chi must sum to 1");
}

int draw_row(std::span<const double> weights, Xoshiro256& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = rng.uniform01() * total;
    double c = 0.0;
    int last_pos = 0;
    for (int j = 0; j < static_cast<int>(weights.size()); ++j) {
        if (weights[j] > 0.0) last_pos = j;
        c += weights[j];
        if (u < c) return j;
    }
    return last_pos;
}

}  // namespace

Matrix convex_mix(const Matrix& a, const Matrix& b, double w) {
    Matrix out(a.rows, a.cols);
    for (size_t i = 0; i < out.a.size(); ++i) out.a[i] = (1.0 - w) * a.a[i] + w * b.a[i];
    return out;
}

HmmModel::HmmModel(HmmSpec spec) : spec_(std::move(spec)) {
    instance_id_ = next_instance_id.fetch_add(1);
    if (spec_.num_states < 1 || spec_.num_symbols < 1) throw InadmissibleParameter("hmm: empty state space");
    // validate at a midpoint of the admissible box
    Vec th(static_cast<size_t>(spec_.par.dim));
    for (int k = 0; k < spec_.par.dim; ++k) th[static_cast<size_t>(k)] = 0.5 * (spec_.par.lower[k] + spec_.par.upper[k]);
    tables(th);
}

std::shared_ptr<const HmmModel::Tables> HmmModel::build_tables(const Vec& theta) const {
    auto t = std::make_shared<Tables>();
    t->theta = theta;
    t->Q = Matrix(spec_.num_states, spec_.num_states);
    t->G = Matrix(spec_.num_states, spec_.num_symbols);
    spec_.par.eval(theta, t->Q, t->G);
    validate_tables(t->Q, t->G, spec_.chi);
    t->dQ.resize(static_cast<size_t>(spec_.par.dim));
    t->dG.resize(static_cast<size_t>(spec_.par.dim));
    for (int k = 0; k < spec_.par.dim; ++k) {
        t->dQ[static_cast<size_t>(k)] = Matrix(spec_.num_states, spec_.num_states);
        t->dG[static_cast<size_t>(k)] = Matrix(spec_.num_states, spec_.num_symbols);
        spec_.par.deriv(theta, k, t->dQ[static_cast<size_t>(k)], t->dG[static_cast<size_t>(k)]);
    }
    return t;
}

std::shared_ptr<const HmmModel::Tables> HmmModel::tables_ptr(const Vec& theta) const {
    // per-thread memo of the last evaluation point; theta changes at most
    // once per step, the densities are queried N*K times
    struct TlsSlot {
        uint64_t owner = 0;
        std::shared_ptr<const Tables> tables;
    };
    thread_local TlsSlot slot;
    if (slot.owner != instance_id_ || !slot.tables || slot.tables->theta != theta) {
        slot.owner = instance_id_;
        slot.tables = build_tables(theta);
    }
    return slot.tables;
}

const HmmModel::Tables& HmmModel::tables(const Vec& theta) const { return *tables_ptr(theta); }

bool HmmModel::admissible(const Vec& theta) const {
    if (static_cast<int>(theta.size()) != spec_.par.dim) return false;
    for (int k = 0; k < spec_.par.dim; ++k) {
        if (!std::isfinite(theta[static_cast<size_t>(k)])) return false;
        if (theta[static_cast<size_t>(k)] < spec_.par.lower[k] || theta[static_cast<size_t>(k)] > spec_.par.upper[k])
            return false;
    }
    return true;
}

void HmmModel::clamp(Vec& theta) const {
    for (int k = 0; k < spec_.par.dim; ++k)
        theta[static_cast<size_t>(k)] =
            std::clamp(theta[static_cast<size_t>(k)], spec_.par.lower[k], spec_.par.upper[k]);
}

void HmmModel::sample_initial(Xoshiro256& rng, std::span<double> out) const {
    out[0] = static_cast<double>(draw_row(spec_.chi, rng));
}

void HmmModel::sample_transition(const Vec& theta, long, std::span<const double> x, Xoshiro256& rng,
                                 std::span<double> out) const {
    const auto& t = tables(theta);
    out[0] = static_cast<double>(draw_row(t.Q.row(state_index(x)), rng));
}

double HmmModel::transition_density(const Vec& theta, long, std::span<const double> x,
                                    std::span<const double> x_next) const {
    return tables(theta).Q(state_index(x), state_index(x_next));
}

double HmmModel::density_bound(const Vec& theta) const {
    check_admissible(theta);
    const auto& t = tables(theta);
    return *std::max_element(t.Q.a.begin(), t.Q.a.end());
}

double HmmModel::emission_density(const Vec& theta, long, std::span<const double> x, const Observation& y) const {
    return tables(theta).G(state_index(x), std::get<int>(y));
}

Observation HmmModel::sample_emission(const Vec& theta, long, std::span<const double> x, Xoshiro256& rng) const {
    const auto& t = tables(theta);
    return draw_row(t.G.row(state_index(x)), rng);
}

void HmmModel::emission_score(const Vec& theta, long, std::span<const double> x, const Observation& y,
                              std::span<double> out) const {
    const auto& t = tables(theta);
    const int i = state_index(x);
    const int s = std::get<int>(y);
    const double g = t.G(i, s);
    for (int k = 0; k < spec_.par.dim; ++k) out[static_cast<size_t>(k)] = t.dG[static_cast<size_t>(k)](i, s) / g;
}

void HmmModel::emission_grad(const Vec& theta, long, std::span<const double> x, const Observation& y,
                             std::span<double> out) const {
    const auto& t = tables(theta);
    const int i = state_index(x);
    const int s = std::get<int>(y);
    for (int k = 0; k < spec_.par.dim; ++k) out[static_cast<size_t>(k)] = t.dG[static_cast<size_t>(k)](i, s);
}

void HmmModel::transition_score(const Vec& theta, long, std::span<const double> x, std::span<const double> x_next,
                                std::span<double> out) const {
    const auto& t = tables(theta);
    const int i = state_index(x);
    const int j = state_index(x_next);
    const double q = t.Q(i, j);
    for (int k = 0; k < spec_.par.dim; ++k) out[static_cast<size_t>(k)] = t.dQ[static_cast<size_t>(k)](i, j) / q;
}

}  // namespace paristf
