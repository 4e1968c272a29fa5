#include "phaseid/search.hpp"

#include "phaseid/errors.hpp"

#include <algorithm>
#include <numeric>

namespace phaseid {

std::vector<PhaseAssignment> enumerate_assignments(std::size_t m, std::size_t reference_channels) {
    if (m < 1 || m > 3) throw Error(ErrorKind::InvalidInput, "target channel count must be 1, 2 or 3");
    if (reference_channels < m || reference_channels > 3) {
        throw Error(ErrorKind::InvalidInput, "reference must have between m and 3 channels");
    }
    std::vector<PhaseAssignment> out;
    std::array<std::uint8_t, 3> current{};
    std::array<bool, 3> used{};
    auto recurse = [&](auto& self, std::size_t depth) -> void {
        if (depth == m) {
            out.emplace_back(std::span<const std::uint8_t>(current.data(), m));
            return;
        }
        for (std::uint8_t r = 0; r < reference_channels; ++r) {
            if (used[r]) continue;
            used[r] = true;
            current[depth] = r;
            self(self, depth + 1);
            used[r] = false;
        }
    };
    recurse(recurse, 0);
    return out;
}

IdentificationResult identify_prefix(const BusRecord& ref, const BusRecord& tgt, const ScoringConfig& cfg,
                                     std::size_t n) {
    cfg.validate();
    const PairwiseTerms terms(ref, tgt, cfg.magnitude_mode, cfg.angle_mode, n);

    IdentificationResult result;
    for (const auto& a : enumerate_assignments(tgt.channel_count(), ref.channel_count())) {
        ScoredAssignment s;
        s.assignment = a;
        s.f_score = terms.f(a);
        s.g_score = terms.g(a);
        s.objective = objective(s.f_score, s.g_score, cfg);
        result.ranked.push_back(s);
    }
    std::stable_sort(result.ranked.begin(), result.ranked.end(), [](const ScoredAssignment& x, const ScoredAssignment& y) {
        if (x.objective != y.objective) return x.objective > y.objective;
        return x.assignment < y.assignment;
    });
    for (std::size_t i = 0; i < result.ranked.size(); ++i) result.ranked[i].rank = i + 1;

    result.winner = result.ranked.front().assignment;
    result.margin = result.ranked.size() > 1 ? result.ranked[0].objective - result.ranked[1].objective : 0.0;

    const auto samples = ref.channel(0).samples();
    result.window = SampleWindow{samples.front().t, samples[terms.sample_count() - 1].t, terms.sample_count()};
    return result;
}

std::string assignment_label(const PhaseAssignment& a, const BusRecord& ref) {
    std::string out;
    for (auto r : a.mapping()) out.push_back(phase_letter(ref.channel(r).phase()));
    return out;
}

IdentificationResult identify(const BusRecord& ref, const BusRecord& tgt, const ScoringConfig& cfg) {
    return identify_prefix(ref, tgt, cfg, ref.sample_count());
}

std::vector<std::size_t> linear_schedule(std::size_t total, std::size_t count) {
    if (count == 0) throw Error(ErrorKind::InvalidInput, "window count must be positive");
    if (total < count) throw Error(ErrorKind::InvalidInput, "fewer samples than requested windows");
    std::vector<std::size_t> lengths(count);
    for (std::size_t k = 1; k <= count; ++k) lengths[k - 1] = (k * total) / count;
    return lengths;
}

SweepResult window_sweep(const BusRecord& ref, const BusRecord& tgt, const ScoringConfig& cfg,
                         const std::vector<std::size_t>& lengths) {
    if (lengths.empty()) throw Error(ErrorKind::InvalidInput, "window_sweep: no window lengths");
    const std::size_t available = ref.sample_count();
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        if (lengths[k] == 0 || lengths[k] > available) {
            throw Error(ErrorKind::InvalidInput, "window_sweep: window length outside [1, available samples]");
        }
        if (k > 0 && lengths[k] <= lengths[k - 1]) {
            throw Error(ErrorKind::InvalidInput, "window_sweep: window lengths must be strictly increasing");
        }
    }

    SweepResult sweep;
    sweep.entries.reserve(lengths.size());
    for (auto n : lengths) sweep.entries.push_back(SweepEntry{n, identify_prefix(ref, tgt, cfg, n)});
    sweep.consistent = std::all_of(sweep.entries.begin(), sweep.entries.end(), [&](const SweepEntry& e) {
        return e.result.winner == sweep.entries.front().result.winner;
    });
    return sweep;
}

}  // namespace phaseid
