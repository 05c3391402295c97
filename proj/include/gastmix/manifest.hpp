#ifndef GASTMIX_MANIFEST_HPP
#define GASTMIX_MANIFEST_HPP

#include <cstdint>
#include <map>
#include <string>

namespace gastmix::manifest {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64 over the file bytes, as a hex string.
std::string file_fingerprint(const std::string& path);

// Per-command run manifest: tool version, command, effective settings with
// the seed, and content fingerprints of every input and output. No
// timestamps, so reruns with identical inputs produce identical manifests.
class ManifestWriter {
public:
    ManifestWriter(std::string command, std::string settings_json)
        : command_(std::move(command)), settings_json_(std::move(settings_json)) {}

    void add_input(const std::string& path) { inputs_[path] = file_fingerprint(path); }
    void add_output(const std::string& path) { outputs_[path] = file_fingerprint(path); }

    void write(const std::string& path) const;

private:
    std::string command_;
    std::string settings_json_;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
};

} // namespace gastmix::manifest

#endif
