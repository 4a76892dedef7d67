#include "grpo/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace grpo {

std::string format_shortest(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

std::string format_17g(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

void write_array(std::ostream& out, const Vector& v) {
    out << '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out << ',';
        out << format_17g(v[i]);
    }
    out << ']';
}

Vector parse_vector(const nlohmann::json& value, const char* field, std::size_t line) {
    if (!value.is_array() || value.empty()) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": '" + field + "' must be a non-empty array");
    }
    Vector v(static_cast<Eigen::Index>(value.size()));
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_number()) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": '" + field + "' has a non-numeric entry");
        }
        v[static_cast<Eigen::Index>(i)] = value[i].get<double>();
    }
    return v;
}

}  // namespace

void write_jsonl(const GroupedDataset& data, std::ostream& out) {
    for (const auto& s : data.samples()) {
        out << "{\"group\":" << s.group << ",\"phi_w\":";
        write_array(out, s.phi_w);
        out << ",\"phi_l\":";
        write_array(out, s.phi_l);
        if (s.ref_logp_w != 0.0 || s.ref_logp_l != 0.0) {
            out << ",\"ref_logratio_w\":" << format_17g(s.ref_logp_w) << ",\"ref_logratio_l\":"
                << format_17g(s.ref_logp_l);
        }
        if (!s.meta.state.empty()) {
            out << ",\"state\":[";
            for (std::size_t i = 0; i < s.meta.state.size(); ++i) {
                if (i > 0) out << ',';
                out << format_17g(s.meta.state[i]);
            }
            out << ']';
        }
        if (s.meta.action_w >= 0) out << ",\"y_w\":" << s.meta.action_w;
        if (s.meta.action_l >= 0) out << ",\"y_l\":" << s.meta.action_l;
        out << "}\n";
    }
}

void save_jsonl(const GroupedDataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::ParseError, "cannot open " + path.string() + " for writing");
    write_jsonl(data, out);
}

GroupedDataset read_jsonl(std::istream& in) {
    std::vector<PreferenceSample> samples;
    std::size_t max_group = 0;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;

        nlohmann::json record;
        try {
            record = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + e.what());
        }
        if (!record.is_object()) throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": not an object");
        for (const char* field : {"group", "phi_w", "phi_l"}) {
            if (!record.contains(field)) {
                throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": missing '" + field + "'");
            }
        }
        const auto& group = record["group"];
        if (!group.is_number_integer() || group.get<long long>() < 0) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": 'group' must be a nonnegative integer");
        }

        PreferenceSample s;
        s.group = group.get<std::size_t>();
        s.phi_w = parse_vector(record["phi_w"], "phi_w", line);
        s.phi_l = parse_vector(record["phi_l"], "phi_l", line);
        if (s.phi_w.size() != s.phi_l.size()) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": phi_w has length " +
                                                   std::to_string(s.phi_w.size()) + " but phi_l has " +
                                                   std::to_string(s.phi_l.size()));
        }
        auto number = [&](const char* field) {
            const auto& v = record[field];
            if (!v.is_number()) {
                throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": '" + field + "' must be a number");
            }
            return v.get<double>();
        };
        if (record.contains("ref_logratio_w")) s.ref_logp_w = number("ref_logratio_w");
        if (record.contains("ref_logratio_l")) s.ref_logp_l = number("ref_logratio_l");
        if (record.contains("state")) {
            const Vector state = parse_vector(record["state"], "state", line);
            s.meta.state.assign(state.data(), state.data() + state.size());
        }
        auto action = [&](const char* field) {
            const auto& v = record[field];
            if (!v.is_number_integer()) {
                throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": '" + field + "' must be an integer");
            }
            return v.get<int>();
        };
        if (record.contains("y_w")) s.meta.action_w = action("y_w");
        if (record.contains("y_l")) s.meta.action_l = action("y_l");

        max_group = std::max(max_group, s.group);
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw Error(ErrorKind::ParseError, "no records found");
    return build_dataset(std::move(samples), max_group + 1);
}

GroupedDataset ingest_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
    return read_jsonl(in);
}

}  // namespace grpo
