#include "tpi/manifest.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tpi/errors.hpp"

#include <json.hpp>

namespace tpi {

namespace {

// FIPS 180-4 SHA-256, single-shot over a byte string.
struct Sha256 {
    std::array<std::uint32_t, 8> h = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                                      0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};

    static std::uint32_t rotr(std::uint32_t x, int n) {
        return (x >> n) | (x << (32 - n));
    }

    void block(const unsigned char* p) {
        static constexpr std::uint32_t k[64] = {
            0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u,
            0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u,
            0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u,
            0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau,
            0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
            0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu, 0x53380d13u,
            0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
            0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u,
            0x19a4c116u, 0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au,
            0x5b9cca4fu, 0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
            0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        }
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 =
                rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 =
                rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
        std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + s1 + ch + k[i] + w[i];
            const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = s0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        h[5] += f;
        h[6] += g;
        h[7] += hh;
    }

    std::string digest(const std::string& bytes) {
        const size_t n = bytes.size();
        size_t i = 0;
        for (; i + 64 <= n; i += 64) {
            block(reinterpret_cast<const unsigned char*>(bytes.data()) + i);
        }
        unsigned char tail[128] = {0};
        const size_t rem = n - i;
        std::memcpy(tail, bytes.data() + i, rem);
        tail[rem] = 0x80;
        const size_t tail_len = rem + 1 + 8 <= 64 ? 64 : 128;
        const std::uint64_t bits = std::uint64_t(n) * 8;
        for (int b = 0; b < 8; ++b) {
            tail[tail_len - 1 - b] = static_cast<unsigned char>(bits >> (8 * b));
        }
        block(tail);
        if (tail_len == 128) block(tail + 64);

        static const char* hex = "0123456789abcdef";
        std::string out;
        out.reserve(64);
        for (std::uint32_t word : h) {
            for (int b = 28; b >= 0; b -= 4) out.push_back(hex[(word >> b) & 0xf]);
        }
        return out;
    }
};

std::string iso_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    Sha256 ctx;
    return ctx.digest(bytes);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for hashing: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw IoError("read failed while hashing: " + path);
    }
    return sha256_hex(buf.str());
}

void RunManifest::write(const std::string& out_dir) const {
    nlohmann::json j;  // std::map-backed: keys serialize alphabetically
    j["command"] = command;
    j["config_echo"] = config_echo;
    j["generated_at"] = iso_utc_now();
    j["tool_version"] = kToolVersion;
    if (seed) {
        j["seed"] = *seed;
    } else {
        j["seed"] = nullptr;
    }
    j["warnings"] = warnings;

    nlohmann::json outs = nlohmann::json::array();
    for (const ManifestEntry& entry : outputs) {
        nlohmann::json o;
        if (entry.sha256.empty()) {
            // Caller listed a path only: checksum and size come from disk.
            const std::filesystem::path full = std::filesystem::path(out_dir) / entry.path;
            if (!std::filesystem::exists(full)) {
                throw IoError("manifest output is missing: " + full.string());
            }
            o["bytes"] = static_cast<std::uint64_t>(std::filesystem::file_size(full));
            o["sha256"] = sha256_file(full.string());
        } else {
            o["bytes"] = entry.bytes;
            o["sha256"] = entry.sha256;
        }
        o["path"] = entry.path;
        outs.push_back(o);
    }
    j["outputs"] = outs;

    const std::filesystem::path dest = std::filesystem::path(out_dir) / "manifest.json";
    std::ofstream out(dest, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + dest.string());
    }
    out << j.dump(2) << '\n';
    out.flush();
    if (!out.good()) {
        throw IoError("write failed: " + dest.string());
    }
}

}  // namespace tpi
