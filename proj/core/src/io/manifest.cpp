#include "pdrlab/io/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "pdrlab/errors.hpp"

namespace pdrlab::io {

using nlohmann::ordered_json;

namespace {

std::string digest_hex(EVP_MD_CTX* ctx) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx, md, &len) != 1) throw NumericError("sha256 finalization failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

struct CtxGuard {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~CtxGuard() { EVP_MD_CTX_free(ctx); }
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    CtxGuard g;
    if (!g.ctx || EVP_DigestInit_ex(g.ctx, EVP_sha256(), nullptr) != 1)
        throw NumericError("sha256 init failed");
    if (EVP_DigestUpdate(g.ctx, bytes.data(), bytes.size()) != 1)
        throw NumericError("sha256 update failed");
    return digest_hex(g.ctx);
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    CtxGuard g;
    if (!g.ctx || EVP_DigestInit_ex(g.ctx, EVP_sha256(), nullptr) != 1)
        throw NumericError("sha256 init failed");
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof(buf));
        const auto n = is.gcount();
        if (n > 0 && EVP_DigestUpdate(g.ctx, buf, static_cast<std::size_t>(n)) != 1)
            throw NumericError("sha256 update failed");
    }
    return digest_hex(g.ctx);
}

void Manifest::save(const std::filesystem::path& path) const {
    ordered_json j;
    j["stage"] = stage;
    j["tool_version"] = tool_version;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["args"] = args;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["extra"] = extra;
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << j.dump(2) << '\n';
    if (!os.good()) throw IoError("write failed: " + path.string());
}

Manifest Manifest::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path.string());
    ordered_json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest " + path.string() + ": " + e.what());
    }
    Manifest m;
    m.stage = j.at("stage").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<uint64_t>();
    m.args = j.at("args").get<std::vector<std::string>>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.extra = j.at("extra").get<std::map<std::string, std::string>>();
    return m;
}

std::optional<std::string> verify_outputs(const Manifest& manifest,
                                          const std::filesystem::path& base_dir) {
    for (const auto& [rel, hash] : manifest.outputs) {
        const auto path = base_dir / rel;
        if (!std::filesystem::exists(path)) return "missing output artifact: " + path.string();
        const std::string actual = sha256_file(path);
        if (actual != hash)
            return "hash mismatch for " + path.string() + ": recorded " + hash + ", recomputed " + actual;
    }
    return std::nullopt;
}

}  // namespace pdrlab::io
