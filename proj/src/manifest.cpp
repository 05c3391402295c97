#include "gastmix/manifest.hpp"

#include "gastmix/error.hpp"
#include "gastmix/hash.hpp"

#include <json.hpp>

#include <fstream>

namespace gastmix::manifest {

std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for fingerprinting: " + path);
    std::uint64_t h = kFnvOffset;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    }
    return to_hex(h);
}

void ManifestWriter::write(const std::string& path) const {
    nlohmann::json j{{"schema", "gastmix.manifest.v1"},
                     {"tool_version", kToolVersion},
                     {"command", command_},
                     {"settings", nlohmann::json::parse(settings_json_)},
                     {"inputs", inputs_},
                     {"outputs", outputs_}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("manifest write failed: " + path);
}

} // namespace gastmix::manifest
