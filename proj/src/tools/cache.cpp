#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>
#include <openssl/evp.h>

#include "ald/tools/runner.hpp"

namespace ald::tools {

using nlohmann::json;

std::string sha256_hex(std::string_view data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string CacheKey::digest() const
{
    std::string buf;
    auto field = [&buf](std::string_view tag, std::string_view value) {
        buf += tag;
        buf += ':';
        buf += std::to_string(value.size());
        buf += ':';
        buf += value;
        buf += '\n';
    };
    field("tool", tool_id);
    field("version", tool_version);
    field("input", input_hash);
    field("name", input_name);
    field("options", std::to_string(options.size()));
    for (const auto& o : options) field("opt", o);
    field("command", std::to_string(command.size()));
    for (const auto& c : command) field("arg", c);
    return sha256_hex(buf);
}

bool same_output(const Transcript& a, const Transcript& b)
{
    return a.stdout_text == b.stdout_text && a.stderr_text == b.stderr_text && a.exit_code == b.exit_code
           && a.tool_version == b.tool_version;
}

std::string sanitize_utf8(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            out += s[i++];
            continue;
        }
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        }
        bool ok = len > 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            ok = (cc & 0xC0) == 0x80;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (ok) {
            static const std::uint32_t min_cp[] = {0, 0, 0x80, 0x800, 0x10000};
            ok = cp >= min_cp[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
        }
        if (ok) {
            out.append(s.substr(i, len));
            i += len;
        } else {
            out += "\xEF\xBF\xBD";
            ++i;
        }
    }
    return out;
}

namespace {

json to_json(const Transcript& t)
{
    return json{{"stdout", t.stdout_text}, {"stderr", t.stderr_text}, {"exit_code", t.exit_code},
                {"tool_version", t.tool_version}};
}

std::optional<Transcript> read_entry(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        json j = json::parse(ss.str());
        Transcript t;
        t.stdout_text = j.at("stdout").get<std::string>();
        t.stderr_text = j.at("stderr").get<std::string>();
        t.exit_code = j.at("exit_code").get<int>();
        t.tool_version = j.at("tool_version").get<std::string>();
        return t;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

} // namespace

std::optional<Transcript> Cache::lookup(const std::string& digest) const
{
    std::lock_guard lock(mu_);
    return read_entry(dir_ / (digest + ".json"));
}

void Cache::store(const std::string& digest, const Transcript& t)
{
    static std::atomic<unsigned> counter{0};
    std::lock_guard lock(mu_);
    std::filesystem::create_directories(dir_);
    auto final_path = dir_ / (digest + ".json");
    auto tmp = dir_ / (digest + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++));
    {
        std::ofstream out(tmp, std::ios::binary);
        out << to_json(t).dump(1) << '\n';
        if (!out) throw std::runtime_error("cannot write cache entry " + tmp.string());
    }
    // link() fails with EEXIST when another writer got there first.
    if (::link(tmp.c_str(), final_path.c_str()) != 0) {
        int e = errno;
        std::filesystem::remove(tmp);
        if (e != EEXIST) throw std::runtime_error("cannot write cache entry: " + std::string(std::strerror(e)));
        auto existing = read_entry(final_path);
        if (existing && !same_output(*existing, t))
            throw ToolError(ToolErrorKind::nondeterminism,
                            "tool output differs from the cached result for key " + digest);
        return;
    }
    std::filesystem::remove(tmp);
}

} // namespace ald::tools
