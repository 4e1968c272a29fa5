#include "phaseid/synthfeeder.hpp"

#include "phaseid/angles.hpp"
#include "phaseid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_map>

namespace phaseid {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Standard normals from mt19937_64 via Box-Muller; both outputs of each
// transform are used, in order.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(theta);
        has_spare_ = true;
        return radius * std::cos(theta);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

bool is_symmetric(const Matrix3c& z, const PhaseMask& mask) {
    double scale = 0.0;
    for (const auto& row : z)
        for (const auto& v : row) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (mask[i] && mask[j] && std::abs(z[i][j] - z[j][i]) > 1e-12 * std::max(scale, 1.0)) return false;
    return true;
}

// Sylvester's criterion on the real part restricted to the present phases.
bool real_part_positive_definite(const Matrix3c& z, const PhaseMask& mask) {
    std::vector<std::size_t> idx;
    for (std::size_t p = 0; p < 3; ++p)
        if (mask[p]) idx.push_back(p);
    auto re = [&](std::size_t i, std::size_t j) { return z[idx[i]][idx[j]].real(); };
    const std::size_t k = idx.size();
    if (k >= 1 && !(re(0, 0) > 0.0)) return false;
    if (k >= 2 && !(re(0, 0) * re(1, 1) - re(0, 1) * re(1, 0) > 0.0)) return false;
    if (k == 3) {
        const double det = re(0, 0) * (re(1, 1) * re(2, 2) - re(1, 2) * re(2, 1)) -
                           re(0, 1) * (re(1, 0) * re(2, 2) - re(1, 2) * re(2, 0)) +
                           re(0, 2) * (re(1, 0) * re(2, 1) - re(1, 1) * re(2, 0));
        if (!(det > 0.0)) return false;
    }
    return true;
}

double asymmetry_factor(Phase p, double a) {
    if (p == Phase::A) return 1.0 + a;
    if (p == Phase::C) return 1.0 - a;
    return 1.0;
}

double round6(double x) {
    double r = std::round(x * 1e6) / 1e6;
    if (r == 0.0) r = 0.0;
    return r;
}

}  // namespace

double FeederScenario::base_voltage_ln() const noexcept { return base_kv_ll * 1000.0 / std::numbers::sqrt3; }

std::size_t SnapshotSolution::index_of(std::string_view bus) const {
    for (std::size_t i = 0; i < bus_ids.size(); ++i)
        if (bus_ids[i] == bus) return i;
    throw Error(ErrorKind::InvalidInput, "unknown bus '" + std::string(bus) + "'");
}

FeederSolver::FeederSolver(const FeederScenario& scenario, SolverOptions options)
    : options_(options), base_voltage_(scenario.base_voltage_ln()) {
    auto invalid = [&](const std::string& what) {
        return Error(ErrorKind::InvalidInput, "scenario '" + scenario.name + "': " + what);
    };
    if (!(scenario.base_kv_ll > 0.0)) throw invalid("base_kv_ll must be positive");
    if (!(scenario.source_magnitude_pu > 0.0)) throw invalid("source magnitude must be positive");
    if (std::fabs(scenario.load_asymmetry) >= 1.0) throw invalid("load_asymmetry must lie in (-1, 1)");

    std::unordered_map<std::string, std::size_t> index;
    for (const auto& id : scenario.buses) {
        if (!index.emplace(id, nodes_.size()).second) throw invalid("duplicate bus '" + id + "'");
        nodes_.push_back(Node{id, -1, {}, {false, false, false}, 0});
    }
    const auto src = index.find(scenario.source_bus);
    if (src == index.end()) throw invalid("source bus '" + scenario.source_bus + "' not in bus list");
    nodes_[src->second].phases = {true, true, true};

    std::vector<std::vector<std::size_t>> children(nodes_.size());
    std::vector<int> shift(nodes_.size(), 0);
    for (const auto& line : scenario.lines) {
        const auto f = index.find(line.from);
        const auto t = index.find(line.to);
        if (f == index.end() || t == index.end()) throw invalid("line references unknown bus");
        if (t->second == src->second) throw invalid("line feeds into the source bus");
        Node& child = nodes_[t->second];
        if (child.parent >= 0) throw invalid("bus '" + line.to + "' has more than one feeder line");
        if (!is_symmetric(line.impedance_ohm, line.phases)) throw invalid("asymmetric impedance on " + line.from + "-" + line.to);
        if (!real_part_positive_definite(line.impedance_ohm, line.phases)) {
            throw invalid("impedance real part not positive definite on " + line.from + "-" + line.to);
        }
        child.parent = static_cast<std::ptrdiff_t>(f->second);
        child.impedance = line.impedance_ohm;
        child.phases = line.phases;
        shift[t->second] = line.transformer_shift;
        children[f->second].push_back(t->second);
    }

    order_.push_back(src->second);
    for (std::size_t k = 0; k < order_.size(); ++k) {
        const std::size_t u = order_[k];
        for (auto v : children[u]) {
            for (std::size_t p = 0; p < 3; ++p) {
                if (nodes_[v].phases[p] && !nodes_[u].phases[p]) throw invalid("bus '" + nodes_[v].id + "' has a phase its parent lacks");
            }
            nodes_[v].cumulative_shift = nodes_[u].cumulative_shift + shift[v];
            order_.push_back(v);
        }
    }
    if (order_.size() != nodes_.size()) throw invalid("topology is not a tree rooted at the source");

    for (const auto& load : scenario.loads) {
        const auto it = index.find(load.bus);
        if (it == index.end()) throw invalid("load on unknown bus '" + load.bus + "'");
        const auto p = static_cast<std::size_t>(load.phase);
        if (p > 2 || !nodes_[it->second].phases[p]) throw invalid("load on absent phase at bus '" + load.bus + "'");
        if (load.kw < 0.0 || load.kvar < 0.0 || load.step_std < 0.0) throw invalid("loads must be nonnegative");
        load_node_.push_back(it->second);
        load_phase_.push_back(p);
        const double k = asymmetry_factor(load.phase, scenario.load_asymmetry);
        base_loads_.emplace_back(load.kw * k, load.kvar * k);
    }

    const double vmag = scenario.source_magnitude_pu * base_voltage_;
    for (std::size_t p = 0; p < 3; ++p) source_[p] = std::polar(vmag, scenario.source_angles_deg[p] * kDeg);
}

std::vector<Complex> FeederSolver::base_loads_kva() const { return base_loads_; }

SnapshotSolution FeederSolver::solve(std::span<const Complex> loads_kva) const {
    if (loads_kva.size() != load_node_.size()) throw Error(ErrorKind::InvalidInput, "load vector size mismatch");
    for (const auto& s : loads_kva) {
        if (s.real() < 0.0 || s.imag() < 0.0 || !std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            throw Error(ErrorKind::InvalidInput, "loads must be nonnegative and finite");
        }
    }

    const std::size_t n = nodes_.size();
    std::vector<Vector3c> demand(n, Vector3c{});  // VA per phase
    for (std::size_t i = 0; i < loads_kva.size(); ++i) demand[load_node_[i]][load_phase_[i]] += loads_kva[i] * 1000.0;

    std::vector<Vector3c> v(n, Vector3c{});
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t p = 0; p < 3; ++p)
            if (nodes_[u].phases[p]) v[u][p] = source_[p];

    std::vector<Vector3c> current(n);
    SnapshotSolution out;
    for (int iter = 1; iter <= options_.max_iterations; ++iter) {
        // Backward sweep: load currents accumulated toward the source.
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t p = 0; p < 3; ++p) {
                current[u][p] = nodes_[u].phases[p] && demand[u][p] != Complex{} ? std::conj(demand[u][p] / v[u][p])
                                                                                 : Complex{};
            }
        }
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            const auto parent = nodes_[*it].parent;
            if (parent < 0) continue;
            for (std::size_t p = 0; p < 3; ++p) current[static_cast<std::size_t>(parent)][p] += current[*it][p];
        }

        // Forward sweep: voltage drops away from the source.
        double mismatch = 0.0;
        for (auto u : order_) {
            const Node& node = nodes_[u];
            if (node.parent < 0) continue;
            const auto& up = v[static_cast<std::size_t>(node.parent)];
            for (std::size_t p = 0; p < 3; ++p) {
                if (!node.phases[p]) continue;
                Complex drop{};
                for (std::size_t q = 0; q < 3; ++q)
                    if (node.phases[q]) drop += node.impedance[p][q] * current[u][q];
                const Complex updated = up[p] - drop;
                mismatch = std::max(mismatch, std::abs(updated - v[u][p]) / base_voltage_);
                v[u][p] = updated;
            }
        }
        if (!std::isfinite(mismatch)) break;
        if (mismatch < options_.tolerance_pu) {
            out.iterations = iter;
            out.max_mismatch_pu = mismatch;
            out.voltages = std::move(v);
            for (const auto& node : nodes_) {
                out.bus_ids.push_back(node.id);
                out.present.push_back(node.phases);
            }
            return out;
        }
    }
    throw Error(ErrorKind::SolverDivergence,
                "forward-backward sweep did not converge within " + std::to_string(options_.max_iterations) + " iterations");
}

SnapshotSolution solve_snapshot(const FeederScenario& scenario, std::span<const Complex> loads_kva,
                                SolverOptions options) {
    return FeederSolver(scenario, options).solve(loads_kva);
}

SimulationOutput generate_timeseries(const FeederScenario& scenario) {
    const FeederSolver solver(scenario);
    if (scenario.snapshots == 0) throw Error(ErrorKind::InvalidInput, "scenario needs at least one snapshot");
    if (scenario.interval_us <= 0) throw Error(ErrorKind::InvalidInput, "interval_us must be positive");
    if (scenario.noise.magnitude_std_pu < 0.0 || scenario.noise.angle_std_deg < 0.0) {
        throw Error(ErrorKind::InvalidInput, "noise standard deviations must be nonnegative");
    }
    if (scenario.walk_reversion < 0.0 || scenario.walk_reversion > 1.0) {
        throw Error(ErrorKind::InvalidInput, "walk_reversion must lie in [0, 1]");
    }

    NormalStream normal(scenario.seed);
    const auto base = solver.base_loads_kva();
    std::vector<double> log_multiplier(base.size(), 0.0);
    std::vector<Complex> loads(base.size());
    const double vbase = scenario.base_voltage_ln();

    const std::size_t buses = solver.bus_count();
    std::vector<std::array<std::vector<PhasorSample>, 3>> samples(buses);
    for (auto& bus : samples)
        for (auto& ch : bus) ch.reserve(scenario.snapshots);

    SimulationOutput out;
    for (std::size_t t = 0; t < scenario.snapshots; ++t) {
        for (std::size_t i = 0; i < base.size(); ++i) {
            log_multiplier[i] = (1.0 - scenario.walk_reversion) * log_multiplier[i] +
                                scenario.loads[i].step_std * normal.next();
            loads[i] = base[i] * std::exp(log_multiplier[i]);
        }
        const auto solution = solver.solve(loads);
        out.max_iterations = std::max(out.max_iterations, solution.iterations);
        out.max_mismatch_pu = std::max(out.max_mismatch_pu, solution.max_mismatch_pu);

        const Timestamp stamp = scenario.start_time_us + static_cast<Timestamp>(t) * scenario.interval_us;
        for (std::size_t b = 0; b < buses; ++b) {
            const double shift = -30.0 * solver.cumulative_shift(b);
            for (std::size_t p = 0; p < 3; ++p) {
                if (!solver.phases(b)[p]) continue;
                const Complex v = solution.voltages[b][p];
                const double mag = std::abs(v) + vbase * scenario.noise.magnitude_std_pu * normal.next();
                const double ang = std::arg(v) / kDeg + shift + scenario.noise.angle_std_deg * normal.next();
                double a = round6(wrap_degrees(ang));
                if (a >= 180.0) a -= 360.0;
                samples[b][p].push_back(PhasorSample{stamp, round6(mag), a});
            }
        }
    }

    const double rate = 1e6 / static_cast<double>(scenario.interval_us);
    for (std::size_t b = 0; b < buses; ++b) {
        std::vector<ChannelSeries> channels;
        for (std::size_t p = 0; p < 3; ++p) {
            if (solver.phases(b)[p]) channels.emplace_back(static_cast<Phase>(p), rate, std::move(samples[b][p]));
        }
        out.records.emplace_back(solver.bus_id(b), vbase, std::move(channels));
    }
    return out;
}

}  // namespace phaseid
