#pragma once

#include "phaseid/types.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phaseid {

using Complex = std::complex<double>;
using Vector3c = std::array<Complex, 3>;
using Matrix3c = std::array<std::array<Complex, 3>, 3>;
using PhaseMask = std::array<bool, 3>;

struct LineSpec {
    std::string from;
    std::string to;
    PhaseMask phases{true, true, true};
    Matrix3c impedance_ohm{};  ///< series impedance, rows/columns A, B, C
    /// Delta-wye style shift: buses downstream of this line see their angles
    /// rotated by transformer_shift * (-30) degrees.
    int transformer_shift = 0;
};

/// Constant-power wye load on one phase, varied by a mean-reverting
/// log-space random walk.
struct LoadSpec {
    std::string bus;
    Phase phase = Phase::A;
    double kw = 0.0;
    double kvar = 0.0;
    double step_std = 0.02;  ///< per-snapshot standard deviation of the log multiplier
};

struct NoiseSpec {
    double magnitude_std_pu = 0.001;
    double angle_std_deg = 0.01;
};

struct FeederScenario {
    std::string name;
    std::vector<std::string> buses;  ///< emission order; includes the source
    std::string source_bus;
    double base_kv_ll = 4.16;
    double source_magnitude_pu = 1.0;
    std::array<double, 3> source_angles_deg{0.0, -120.0, 120.0};
    std::vector<LineSpec> lines;
    std::vector<LoadSpec> loads;
    std::size_t snapshots = 1000;
    std::uint64_t seed = 42;
    NoiseSpec noise;
    /// Fraction of the log multiplier pulled back toward zero each step.
    double walk_reversion = 0.02;
    /// Scales phase A loads by (1 + a) and phase C loads by (1 - a).
    double load_asymmetry = 0.0;
    Timestamp start_time_us = 0;
    std::int64_t interval_us = 1'000'000;

    double base_voltage_ln() const noexcept;
};

FeederScenario load_scenario(const std::filesystem::path& path);
FeederScenario parse_scenario(std::string_view json_text);
/// Normalised JSON echo of every field, suitable for parse_scenario.
std::string scenario_to_json(const FeederScenario& scenario);

struct SolverOptions {
    double tolerance_pu = 1e-6;
    int max_iterations = 50;
};

struct SnapshotSolution {
    std::vector<std::string> bus_ids;
    std::vector<Vector3c> voltages;  ///< volts, line-to-neutral; zero on absent phases
    std::vector<PhaseMask> present;
    int iterations = 0;
    double max_mismatch_pu = 0.0;  ///< largest per-phase voltage change in the final sweep

    std::size_t index_of(std::string_view bus) const;
};

/// Pre-processed radial network: validated topology, sweep order, cumulative
/// transformer shifts. Construction throws InvalidInput on a non-radial
/// topology, unknown buses, phase sets that grow downstream, asymmetric
/// impedances, impedances whose real part is not positive definite, or
/// negative loads.
class FeederSolver {
public:
    explicit FeederSolver(const FeederScenario& scenario, SolverOptions options = {});

    /// Forward-backward sweep with constant-power loads. `loads_kva[i]` is
    /// P + jQ (kW, kvar) of scenario load i. Throws SolverDivergence when the
    /// sweep has not settled within the iteration cap.
    SnapshotSolution solve(std::span<const Complex> loads_kva) const;

    std::size_t bus_count() const noexcept { return nodes_.size(); }
    const std::string& bus_id(std::size_t i) const { return nodes_.at(i).id; }
    const PhaseMask& phases(std::size_t i) const { return nodes_.at(i).phases; }
    /// Sum of transformer_shift along the path from the source.
    int cumulative_shift(std::size_t i) const { return nodes_.at(i).cumulative_shift; }
    /// Base loads (kW + j kvar) after the asymmetry scaling.
    std::vector<Complex> base_loads_kva() const;

private:
    struct Node {
        std::string id;
        std::ptrdiff_t parent = -1;
        Matrix3c impedance{};
        PhaseMask phases{};
        int cumulative_shift = 0;
    };

    SolverOptions options_;
    double base_voltage_ = 0.0;
    std::vector<Complex> base_loads_;        ///< kVA, asymmetry applied
    std::vector<Node> nodes_;                ///< indexed by scenario bus order
    std::vector<std::size_t> order_;         ///< source first, parents before children
    std::vector<std::size_t> load_node_;     ///< node index of each load
    std::vector<std::size_t> load_phase_;
    Vector3c source_{};
};

/// Convenience wrapper building a FeederSolver for one snapshot.
SnapshotSolution solve_snapshot(const FeederScenario& scenario, std::span<const Complex> loads_kva,
                                SolverOptions options = {});

struct SimulationOutput {
    std::vector<BusRecord> records;  ///< one per scenario bus, scenario order
    int max_iterations = 0;
    double max_mismatch_pu = 0.0;
};

/// Runs the full scenario: load walk, power flow, transformer shifts,
/// measurement noise, six-decimal quantisation. Reproducible from the seed.
///
/// Randomness comes from std::mt19937_64 seeded with `scenario.seed`;
/// uniforms are the top 53 bits scaled by 2^-53 and normals use the
/// Box-Muller transform. Per snapshot the draw order is: one normal per load
/// (scenario order), then per bus and present phase one magnitude-noise and
/// one angle-noise normal.
SimulationOutput generate_timeseries(const FeederScenario& scenario);

}  // namespace phaseid
