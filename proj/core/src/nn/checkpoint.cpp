#include "pdrlab/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "pdrlab/errors.hpp"
#include "pdrlab/nn/params.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian float64");

namespace pdrlab::nn {

using nlohmann::ordered_json;

namespace {

constexpr char kMagic[] = "PDRLCKPT";

ordered_json spec_to_json(const NetworkSpec& s) {
    ordered_json j;
    j["input_dim"] = s.input_dim;
    j["ff_in_dims"] = s.ff_in_dims;
    j["lstm_layers"] = s.lstm_layers;
    j["lstm_cells"] = s.lstm_cells;
    j["dropout_rate"] = s.dropout_rate;
    j["ff_out_dims"] = s.ff_out_dims;
    j["init_seed"] = s.init_seed;
    return j;
}

NetworkSpec spec_from_json(const ordered_json& j) {
    NetworkSpec s;
    s.input_dim = j.at("input_dim").get<int>();
    s.ff_in_dims = j.at("ff_in_dims").get<std::vector<int>>();
    s.lstm_layers = j.at("lstm_layers").get<int>();
    s.lstm_cells = j.at("lstm_cells").get<int>();
    s.dropout_rate = j.at("dropout_rate").get<double>();
    s.ff_out_dims = j.at("ff_out_dims").get<std::vector<int>>();
    s.init_seed = j.at("init_seed").get<uint64_t>();
    return s;
}

void write_u64(std::ostream& os, uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint64_t read_u64(std::istream& is) {
    uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace

void Checkpoint::save(const std::filesystem::path& path) const {
    ordered_json header;
    header["format_version"] = format_version;
    header["spec"] = spec_to_json(spec);
    header["channels"] = channels;
    header["window"] = window;
    header["stride"] = stride;
    header["horizon_s"] = horizon_s;
    header["fs"] = fs;
    header["output_mode"] = output_mode;
    header["input_norm"] = {{"mean", input_norm.mean}, {"inv_std", input_norm.inv_std}};
    header["target_mean"] = target_mean;
    header["target_std"] = target_std;
    header["meta"] = {{"epochs_run", meta.epochs_run},
                      {"best_epoch", meta.best_epoch},
                      {"best_val_loss", meta.best_val_loss},
                      {"train_loss", meta.train_loss},
                      {"val_loss", meta.val_loss},
                      {"seed", meta.seed}};

    // Sanity: the blob must match the spec-derived parameter count.
    const auto layout = ParamLayout::build(spec);
    if (weights.size() != layout.total_size())
        throw ConfigError("Checkpoint::save: weight count does not match the spec layout");

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    const std::string hj = header.dump();
    os.write(kMagic, sizeof(kMagic) - 1);
    write_u64(os, hj.size());
    os.write(hj.data(), static_cast<std::streamsize>(hj.size()));
    write_u64(os, static_cast<uint64_t>(weights.size()));
    os.write(reinterpret_cast<const char*>(weights.data()),
             static_cast<std::streamsize>(weights.size() * sizeof(double)));
    if (!os.good()) throw IoError("write failed: " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());

    char magic[sizeof(kMagic) - 1];
    is.read(magic, sizeof(magic));
    if (!is.good() || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw DataError("not a checkpoint file: " + path.string());

    const uint64_t hlen = read_u64(is);
    std::string hj(hlen, '\0');
    is.read(hj.data(), static_cast<std::streamsize>(hlen));
    ordered_json header;
    try {
        header = ordered_json::parse(hj);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint header: ") + e.what());
    }

    Checkpoint c;
    c.format_version = header.at("format_version").get<int>();
    if (c.format_version != 1)
        throw DataError("unsupported checkpoint format version " + std::to_string(c.format_version));
    c.spec = spec_from_json(header.at("spec"));
    c.channels = header.at("channels").get<std::vector<std::string>>();
    c.window = header.at("window").get<int>();
    c.stride = header.at("stride").get<int>();
    c.horizon_s = header.at("horizon_s").get<double>();
    c.fs = header.at("fs").get<double>();
    c.output_mode = header.at("output_mode").get<std::string>();
    c.input_norm.mean = header.at("input_norm").at("mean").get<std::vector<double>>();
    c.input_norm.inv_std = header.at("input_norm").at("inv_std").get<std::vector<double>>();
    c.target_mean = header.at("target_mean").get<std::array<double, 2>>();
    c.target_std = header.at("target_std").get<std::array<double, 2>>();
    const auto& meta = header.at("meta");
    c.meta.epochs_run = meta.at("epochs_run").get<int>();
    c.meta.best_epoch = meta.at("best_epoch").get<int>();
    c.meta.best_val_loss = meta.at("best_val_loss").get<double>();
    c.meta.train_loss = meta.at("train_loss").get<std::vector<double>>();
    c.meta.val_loss = meta.at("val_loss").get<std::vector<double>>();
    c.meta.seed = meta.at("seed").get<uint64_t>();

    const uint64_t n = read_u64(is);
    const auto layout = ParamLayout::build(c.spec);
    if (static_cast<Eigen::Index>(n) != layout.total_size())
        throw DataError("checkpoint weight count does not match its spec");
    c.weights.resize(static_cast<Eigen::Index>(n));
    is.read(reinterpret_cast<char*>(c.weights.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is.good()) throw DataError("truncated checkpoint: " + path.string());
    return c;
}

void Checkpoint::normalize(Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.cols()) != input_norm.mean.size())
        throw ConfigError("Checkpoint::normalize: column count does not match stored statistics");
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const auto cu = static_cast<std::size_t>(c);
        x.col(c) = (x.col(c).array() - input_norm.mean[cu]) * input_norm.inv_std[cu];
    }
}

Eigen::Vector2d Checkpoint::denormalize(const Eigen::VectorXd& y) const {
    return {y(0) * target_std[0] + target_mean[0], y(1) * target_std[1] + target_mean[1]};
}

Eigen::Vector2d Checkpoint::normalize_target(const Eigen::Vector2d& t) const {
    return {(t(0) - target_mean[0]) / target_std[0], (t(1) - target_mean[1]) / target_std[1]};
}

}  // namespace pdrlab::nn
