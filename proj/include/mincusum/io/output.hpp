#pragma once

// Needs OpenSSL::Crypto at link time.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

namespace mincusum::io {

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int k = 0; k < len; ++k) os << std::setw(2) << static_cast<int>(digest[k]);
    return os.str();
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes to a sibling temporary file, then renames over the target.
inline void write_atomic(const std::filesystem::path& target, std::string_view content) {
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, target);
}

struct OutputFile {
    std::string path;
    std::string sha256;
    std::size_t bytes = 0;
};

/// Tracks the files of one command. Unless commit() is called, every file it
/// wrote is removed again on destruction.
class OutputSession {
public:
    OutputSession() : start_(std::chrono::steady_clock::now()) {}
    OutputSession(const OutputSession&) = delete;
    OutputSession& operator=(const OutputSession&) = delete;

    ~OutputSession() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : files_) std::filesystem::remove(f.path, ec);
        if (!manifest_.empty()) std::filesystem::remove(manifest_, ec);
    }

    const OutputFile& write(const std::filesystem::path& path, std::string_view content) {
        write_atomic(path, content);
        files_.push_back(OutputFile{path.string(), sha256_hex(content), content.size()});
        return files_.back();
    }

    /// Manifest last, after every result file is in place.
    void write_manifest(const std::filesystem::path& path, nlohmann::ordered_json body) {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        body["wall_clock_seconds"] = seconds;
        nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
        for (const auto& f : files_)
            outputs.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
        body["outputs"] = outputs;
        manifest_ = path.string();
        write_atomic(path, body.dump(2) + "\n");
    }

    void commit() noexcept { committed_ = true; }
    const std::vector<OutputFile>& files() const noexcept { return files_; }

private:
    std::chrono::steady_clock::time_point start_;
    std::vector<OutputFile> files_;
    std::string manifest_;
    bool committed_ = false;
};

}  // namespace mincusum::io
