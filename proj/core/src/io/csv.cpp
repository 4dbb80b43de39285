#include "pdrlab/io/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pdrlab/errors.hpp"

namespace pdrlab::io {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path.string());
    return is;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw DataError("bad number '" + s + "' in " + path.string());
    }
}

// Reads all non-comment lines; first is the header.
std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        rows.push_back(split(line, ','));
    }
    if (rows.empty()) throw DataError("empty csv: " + path.string());
    return rows;
}

void write_comment(std::ofstream& os, const std::string& comment) {
    if (!comment.empty()) os << "# " << comment << '\n';
}

}  // namespace

void write_reference_csv(const std::filesystem::path& path, std::span<const ReferencePose> ref,
                         const std::string& comment) {
    auto os = open_out(path);
    write_comment(os, comment);
    os << "t,x,y,speed,heading,cum_distance\n";
    for (const auto& p : ref)
        os << fmt(p.t) << ',' << fmt(p.x) << ',' << fmt(p.y) << ',' << fmt(p.speed) << ','
           << fmt(p.heading) << ',' << fmt(p.cum_distance) << '\n';
    if (!os.good()) throw IoError("write failed: " + path.string());
}

std::vector<ReferencePose> read_reference_csv(const std::filesystem::path& path) {
    const auto rows = read_rows(path);
    if (rows[0] != std::vector<std::string>{"t", "x", "y", "speed", "heading", "cum_distance"})
        throw DataError("unexpected reference csv header in " + path.string());
    std::vector<ReferencePose> out;
    out.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 6) throw DataError("bad reference csv row in " + path.string());
        out.push_back({parse_double(rows[i][0], path), parse_double(rows[i][1], path),
                       parse_double(rows[i][2], path), parse_double(rows[i][3], path),
                       parse_double(rows[i][4], path), parse_double(rows[i][5], path)});
    }
    return out;
}

void write_estimates_csv(const std::filesystem::path& path, std::span<const PoseEstimate> est,
                         const std::string& comment) {
    auto os = open_out(path);
    write_comment(os, comment);
    os << "t,x,y,var_x,var_y\n";
    for (const auto& e : est)
        os << fmt(e.t) << ',' << fmt(e.x) << ',' << fmt(e.y) << ',' << fmt(e.var_x) << ','
           << fmt(e.var_y) << '\n';
    if (!os.good()) throw IoError("write failed: " + path.string());
}

std::vector<PoseEstimate> read_estimates_csv(const std::filesystem::path& path) {
    const auto rows = read_rows(path);
    if (rows[0] != std::vector<std::string>{"t", "x", "y", "var_x", "var_y"})
        throw DataError("unexpected estimates csv header in " + path.string());
    std::vector<PoseEstimate> out;
    out.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 5) throw DataError("bad estimates csv row in " + path.string());
        out.push_back({parse_double(rows[i][0], path), parse_double(rows[i][1], path),
                       parse_double(rows[i][2], path), parse_double(rows[i][3], path),
                       parse_double(rows[i][4], path), 0.0, false});
    }
    return out;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          std::span<const classic::DeadReckonState> trajectory,
                          const std::string& comment) {
    auto os = open_out(path);
    write_comment(os, comment);
    os << "t,x,y,theta\n";
    for (const auto& s : trajectory)
        os << fmt(s.t) << ',' << fmt(s.x) << ',' << fmt(s.y) << ',' << fmt(s.heading) << '\n';
    if (!os.good()) throw IoError("write failed: " + path.string());
}

void write_segment_csv(const std::filesystem::path& path, const streams::Segment& segment,
                       const std::string& comment) {
    auto os = open_out(path);
    write_comment(os, comment);
    os << "# segment id=" << segment.id << " fs=" << fmt(segment.fs) << " t0=" << fmt(segment.t0)
       << '\n';

    os << "t";
    for (const auto& c : segment.channels) {
        if (c.dim == 1) os << ',' << c.name;
        else
            for (int d = 0; d < c.dim; ++d) os << ',' << c.name << '.' << d;
    }
    for (const auto& c : segment.channels) os << ",valid:" << c.name;
    if (segment.has_ref()) os << ",ref:x,ref:y,ref:speed,ref:heading,ref:cum";
    os << '\n';

    for (std::size_t k = 0; k < segment.ticks; ++k) {
        os << fmt(segment.time_at(k));
        for (const auto& c : segment.channels)
            for (int d = 0; d < c.dim; ++d) os << ',' << fmt(c.at(k, d));
        for (const auto& c : segment.channels) os << ',' << static_cast<int>(c.validity[k]);
        if (segment.has_ref()) {
            const auto& r = segment.ref[k];
            os << ',' << fmt(r.x) << ',' << fmt(r.y) << ',' << fmt(r.speed) << ',' << fmt(r.heading)
               << ',' << fmt(r.cum_distance);
        }
        os << '\n';
    }
    if (!os.good()) throw IoError("write failed: " + path.string());
}

streams::Segment read_segment_csv(const std::filesystem::path& path) {
    auto is = open_in(path);
    streams::Segment seg;
    std::string line;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.rfind("# segment ", 0) == 0) {
            std::stringstream ss(line.substr(10));
            std::string kv;
            while (ss >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "id") seg.id = val;
                else if (key == "fs") seg.fs = parse_double(val, path);
                else if (key == "t0") seg.t0 = parse_double(val, path);
            }
            continue;
        }
        if (line[0] == '#') continue;
        if (header.empty()) header = split(line, ',');
        else rows.push_back(split(line, ','));
    }
    if (header.empty() || header[0] != "t") throw DataError("unexpected segment csv header in " + path.string());

    // Reconstruct channel layout from the header: value columns come first
    // (grouped by "name" or "name.idx"), then "valid:" flags, then "ref:".
    struct Col {
        enum Kind { value, valid, ref } kind;
        std::string channel;
        int comp;
    };
    std::vector<Col> cols;
    bool has_ref = false;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::string& h = header[c];
        if (h.rfind("valid:", 0) == 0) {
            cols.push_back({Col::valid, h.substr(6), 0});
        } else if (h.rfind("ref:", 0) == 0) {
            cols.push_back({Col::ref, h.substr(4), 0});
            has_ref = true;
        } else {
            const auto dot = h.rfind('.');
            std::string name = h;
            int comp = 0;
            if (dot != std::string::npos && dot + 1 < h.size() &&
                h.find_first_not_of("0123456789", dot + 1) == std::string::npos) {
                name = h.substr(0, dot);
                comp = std::stoi(h.substr(dot + 1));
            }
            cols.push_back({Col::value, name, comp});
            auto* ch = seg.find(name);
            if (!ch) {
                seg.channels.push_back({name, comp + 1, {}, {}});
            } else {
                ch->dim = std::max(ch->dim, comp + 1);
            }
        }
    }

    seg.ticks = rows.size();
    for (auto& ch : seg.channels) {
        ch.data.assign(seg.ticks * static_cast<std::size_t>(ch.dim), 0.0);
        ch.validity.assign(seg.ticks, streams::Validity::missing);
    }
    if (has_ref) seg.ref.resize(seg.ticks);

    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& row = rows[k];
        if (row.size() != header.size()) throw DataError("bad segment csv row in " + path.string());
        for (std::size_t c = 1; c < row.size(); ++c) {
            const Col& col = cols[c - 1];
            const double v = parse_double(row[c], path);
            if (col.kind == Col::value) {
                seg.find(col.channel)->at(k, col.comp) = v;
            } else if (col.kind == Col::valid) {
                seg.find(col.channel)->validity[k] = static_cast<streams::Validity>(static_cast<int>(v));
            } else {
                auto& r = seg.ref[k];
                r.t = seg.time_at(k);
                if (col.channel == "x") r.x = v;
                else if (col.channel == "y") r.y = v;
                else if (col.channel == "speed") r.speed = v;
                else if (col.channel == "heading") r.heading = v;
                else if (col.channel == "cum") r.cum_distance = v;
            }
        }
    }
    return seg;
}

}  // namespace pdrlab::io
