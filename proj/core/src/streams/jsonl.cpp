#include "pdrlab/streams/jsonl.hpp"

#include <fstream>
#include <span>

#include <json.hpp>

#include "pdrlab/errors.hpp"

namespace pdrlab::streams {

using nlohmann::ordered_json;

void write_jsonl(std::ostream& os, std::span<const SensorSample> samples) {
    for (const auto& s : samples) {
        ordered_json j;
        j["t_meas"] = s.t_meas;
        j["t_avail"] = s.t_avail;
        j["modality"] = to_string(s.modality);
        j["values"] = s.values;
        j["source"] = s.source;
        os << j.dump() << '\n';
    }
}

void write_jsonl(const std::filesystem::path& path, std::span<const SensorSample> samples) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    write_jsonl(os, samples);
    if (!os.good()) throw IoError("write failed: " + path.string());
}

std::vector<SensorSample> read_jsonl(std::istream& is) {
    std::vector<SensorSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        SensorSample s;
        s.t_meas = j.at("t_meas").get<double>();
        s.t_avail = j.at("t_avail").get<double>();
        s.modality = modality_from_string(j.at("modality").get<std::string>());
        s.values = j.at("values").get<std::vector<double>>();
        s.source = j.at("source").get<std::string>();
        if (static_cast<int>(s.values.size()) != modality_dim(s.modality))
            throw DataError("jsonl line " + std::to_string(line_no) + ": bad value count for modality " +
                            to_string(s.modality));
        samples.push_back(std::move(s));
    }
    return samples;
}

std::vector<SensorSample> read_jsonl(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path.string());
    return read_jsonl(is);
}

}  // namespace pdrlab::streams
