#include "phaseid/ingest.hpp"

#include "phaseid/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <unordered_map>

namespace phaseid {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    T value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

struct RawSample {
    PhasorSample sample;
    std::size_t line;
};

struct RawBus {
    std::string id;
    std::array<std::vector<RawSample>, 3> phases;
};

double infer_rate(const RawBus& bus) {
    std::vector<Timestamp> deltas;
    for (const auto& ch : bus.phases) {
        for (std::size_t i = 1; i < ch.size(); ++i) deltas.push_back(ch[i].sample.t - ch[i - 1].sample.t);
    }
    if (deltas.empty()) return 1.0;  // single-sample channels carry no spacing information
    auto mid = deltas.begin() + static_cast<std::ptrdiff_t>(deltas.size() / 2);
    std::nth_element(deltas.begin(), mid, deltas.end());
    return 1e6 / static_cast<double>(*mid);
}

// Six-decimal rounding shared by the writer, so records and their CSV text
// agree bit-for-bit after a round trip.
double round6(double x) {
    double r = std::round(x * 1e6) / 1e6;
    if (r == 0.0) r = 0.0;  // drops negative zero
    return r;
}

}  // namespace

std::vector<BusRecord> parse_phasor_csv(const std::filesystem::path& path, const ParseOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    return parse_phasor_csv(in, options);
}

std::vector<BusRecord> parse_phasor_csv(std::istream& in, const ParseOptions& options) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty file: missing header", 1);
    ++line_no;
    std::string_view header = line;
    if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
    if (trim(header) != kPhasorCsvHeader) {
        throw Error(ErrorKind::Parse, "expected header '" + std::string(kPhasorCsvHeader) + "'", line_no);
    }

    std::vector<RawBus> buses;
    std::unordered_map<std::string, std::size_t> index;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = trim(line);
        if (row.empty()) continue;

        std::array<std::string_view, 5> f;
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const auto comma = row.find(',', start);
            if (count == f.size()) {
                count = f.size() + 1;
                break;
            }
            f[count++] = trim(row.substr(start, comma == std::string_view::npos ? comma : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (count != f.size()) throw Error(ErrorKind::Parse, "expected 5 fields", line_no);

        const auto t = parse_number<Timestamp>(f[0]);
        if (!t) throw Error(ErrorKind::Parse, "bad timestamp_us '" + std::string(f[0]) + "'", line_no);
        if (f[1].empty()) throw Error(ErrorKind::Parse, "empty bus_id", line_no);
        const auto phase = phase_from_letter(f[2]);
        if (!phase) throw Error(ErrorKind::Parse, "phase must be A, B or C", line_no);
        const auto mag = parse_number<double>(f[3]);
        if (!mag || !std::isfinite(*mag)) throw Error(ErrorKind::Parse, "bad magnitude_v", line_no);
        const auto ang = parse_number<double>(f[4]);
        if (!ang || !std::isfinite(*ang)) throw Error(ErrorKind::Parse, "bad angle_deg", line_no);
        if (*ang < -180.0 || *ang >= 180.0) throw Error(ErrorKind::Parse, "angle_deg outside [-180, 180)", line_no);
        if (*mag <= 0.0) throw Error(ErrorKind::Validation, "magnitude_v must be positive", line_no);

        std::string id(f[1]);
        auto [it, inserted] = index.try_emplace(id, buses.size());
        if (inserted) buses.push_back(RawBus{id, {}});
        buses[it->second].phases[static_cast<std::size_t>(*phase)].push_back({{*t, *mag, *ang}, line_no});
    }

    std::vector<BusRecord> records;
    records.reserve(buses.size());
    for (auto& bus : buses) {
        double mag_sum = 0.0;
        std::size_t mag_count = 0;
        for (auto& ch : bus.phases) {
            std::stable_sort(ch.begin(), ch.end(),
                             [](const RawSample& a, const RawSample& b) { return a.sample.t < b.sample.t; });
            for (std::size_t i = 1; i < ch.size(); ++i) {
                if (ch[i].sample.t == ch[i - 1].sample.t) {
                    throw Error(ErrorKind::DuplicateSample,
                                "duplicate sample for bus '" + bus.id + "' at t=" + std::to_string(ch[i].sample.t),
                                std::max(ch[i].line, ch[i - 1].line));
                }
            }
            for (const auto& s : ch) mag_sum += s.sample.magnitude;
            mag_count += ch.size();
        }

        const double rate = infer_rate(bus);
        std::vector<ChannelSeries> channels;
        for (std::size_t p = 0; p < 3; ++p) {
            if (bus.phases[p].empty()) continue;
            std::vector<PhasorSample> samples;
            samples.reserve(bus.phases[p].size());
            for (const auto& s : bus.phases[p]) samples.push_back(s.sample);
            try {
                channels.emplace_back(static_cast<Phase>(p), rate, std::move(samples));
            } catch (const Error& e) {
                throw Error(ErrorKind::Validation, "bus '" + bus.id + "': " + e.what());
            }
        }

        double nominal = mag_sum / static_cast<double>(mag_count);
        if (auto it = options.nominal_voltage.find(bus.id); it != options.nominal_voltage.end()) nominal = it->second;
        records.emplace_back(bus.id, nominal, std::move(channels));
    }
    return records;
}

void write_phasor_csv(std::ostream& out, std::span<const BusRecord> records) {
    struct Row {
        Timestamp t;
        std::size_t record;
        std::size_t channel;
        const PhasorSample* sample;
    };
    std::vector<Row> rows;
    for (std::size_t r = 0; r < records.size(); ++r) {
        for (std::size_t c = 0; c < records[r].channel_count(); ++c) {
            for (const auto& s : records[r].channel(c).samples()) rows.push_back({s.t, r, c, &s});
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.record != b.record) return a.record < b.record;
        return a.channel < b.channel;
    });

    out << kPhasorCsvHeader << '\n';
    char buf[64];
    for (const auto& row : rows) {
        const auto& rec = records[row.record];
        double angle = round6(row.sample->angle);
        if (angle >= 180.0) angle -= 360.0;
        const int len = std::snprintf(buf, sizeof buf, ",%c,%.6f,%.6f\n", phase_letter(rec.channel(row.channel).phase()),
                                      round6(row.sample->magnitude), angle);
        out << row.t << ',' << rec.bus_id();
        out.write(buf, len);
    }
}

const BusRecord& find_bus(std::span<const BusRecord> records, std::string_view bus_id) {
    for (const auto& r : records) {
        if (r.bus_id() == bus_id) return r;
    }
    throw Error(ErrorKind::InsufficientData, "bus '" + std::string(bus_id) + "' not present in data");
}

namespace {

// Timestamps present on every channel of the record, as indices per channel.
std::vector<std::vector<std::size_t>> co_sampled_indices(const BusRecord& rec) {
    const std::size_t m = rec.channel_count();
    std::vector<std::vector<std::size_t>> idx(m);
    std::vector<std::size_t> cursor(m, 0);
    const auto base = rec.channel(0).samples();
    for (std::size_t i = 0; i < base.size(); ++i) {
        const Timestamp t = base[i].t;
        bool everywhere = true;
        for (std::size_t c = 1; c < m; ++c) {
            const auto s = rec.channel(c).samples();
            while (cursor[c] < s.size() && s[cursor[c]].t < t) ++cursor[c];
            if (cursor[c] >= s.size() || s[cursor[c]].t != t) everywhere = false;
        }
        if (!everywhere) continue;
        idx[0].push_back(i);
        for (std::size_t c = 1; c < m; ++c) idx[c].push_back(cursor[c]);
    }
    return idx;
}

std::size_t max_channel_size(const BusRecord& rec) {
    std::size_t n = 0;
    for (const auto& ch : rec.channels()) n = std::max(n, ch.size());
    return n;
}

}  // namespace

AlignedPair align_records(const BusRecord& ref, const BusRecord& tgt, const AlignmentOptions& options) {
    const std::size_t ref_count = max_channel_size(ref);
    const std::size_t tgt_count = max_channel_size(tgt);
    if (ref_count == 0 || tgt_count == 0) throw Error(ErrorKind::InsufficientData, "align_records: empty record");

    const double period = std::min(ref.channel(0).period_us(), tgt.channel(0).period_us());
    const std::int64_t tol = options.tolerance_us < 0 ? static_cast<std::int64_t>(std::floor(period / 4.0))
                                                      : options.tolerance_us;
    if (static_cast<double>(tol) >= period / 2.0) {
        throw Error(ErrorKind::InvalidInput, "align_records: tolerance must be below half the sample period");
    }

    const auto ref_idx = co_sampled_indices(ref);
    const auto tgt_idx = co_sampled_indices(tgt);
    const auto ref_t = ref.channel(0).samples();
    const auto tgt_t = tgt.channel(0).samples();

    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // positions into ref_idx / tgt_idx
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ref_idx[0].size() && j < tgt_idx[0].size()) {
        const Timestamp tr = ref_t[ref_idx[0][i]].t;
        const Timestamp tt = tgt_t[tgt_idx[0][j]].t;
        if (std::llabs(tr - tt) <= tol) {
            pairs.emplace_back(i++, j++);
        } else if (tr < tt) {
            ++i;
        } else {
            ++j;
        }
    }

    AlignmentReport report;
    report.paired_count = pairs.size();
    report.dropped_ref = ref_count - pairs.size();
    report.dropped_tgt = tgt_count - pairs.size();
    report.overlap_fraction = static_cast<double>(pairs.size()) / static_cast<double>(std::min(ref_count, tgt_count));
    if (report.overlap_fraction < options.min_overlap) {
        throw Error(ErrorKind::InsufficientOverlap,
                    "align_records: overlap " + std::to_string(report.overlap_fraction) + " below threshold " +
                        std::to_string(options.min_overlap) + " for '" + ref.bus_id() + "' / '" + tgt.bus_id() + "'");
    }

    std::vector<ChannelSeries> ref_out;
    for (std::size_t c = 0; c < ref.channel_count(); ++c) {
        const auto src = ref.channel(c).samples();
        std::vector<PhasorSample> s;
        s.reserve(pairs.size());
        for (const auto& [pi, pj] : pairs) s.push_back(src[ref_idx[c][pi]]);
        ref_out.emplace_back(ref.channel(c).phase(), ref.channel(c).nominal_rate(), std::move(s));
    }
    std::vector<ChannelSeries> tgt_out;
    for (std::size_t c = 0; c < tgt.channel_count(); ++c) {
        const auto src = tgt.channel(c).samples();
        std::vector<PhasorSample> s;
        s.reserve(pairs.size());
        for (const auto& [pi, pj] : pairs) {
            PhasorSample sample = src[tgt_idx[c][pj]];
            sample.t = ref_t[ref_idx[0][pi]].t;
            s.push_back(sample);
        }
        tgt_out.emplace_back(tgt.channel(c).phase(), ref.channel(0).nominal_rate(), std::move(s));
    }

    return AlignedPair{BusRecord(ref.bus_id(), ref.nominal_voltage(), std::move(ref_out)),
                       BusRecord(tgt.bus_id(), tgt.nominal_voltage(), std::move(tgt_out)), report};
}

}  // namespace phaseid
