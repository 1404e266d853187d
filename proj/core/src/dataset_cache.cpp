#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "edboard/dataset.hpp"
#include "edboard/error.hpp"

namespace edboard::dataset {

namespace {

constexpr char kMagic[8] = {'E', 'D', 'B', 'W', 'I', 'N', '0', '1'};

template <typename T>
void put(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes, bytes + sizeof(T));
    }
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        throw ValidationError("dataset cache is truncated");
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes, bytes + sizeof(T));
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

std::uint64_t schema_hash() {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    bool first = true;
    for (auto name : features::column_names()) {
        if (!first) {
            h ^= static_cast<unsigned char>(',');
            h *= 0x100000001b3ULL;
        }
        first = false;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

void write_cache(std::ostream& out, const WindowedDataset& data, const ScalerParams& scaler) {
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(data.lag));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(data.horizon));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(data.channels));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(data.target_column));
    put<std::uint64_t>(out, data.size());
    put<std::uint64_t>(out, schema_hash());
    for (double m : scaler.mean) put(out, m);
    for (double s : scaler.std) put(out, s);
    for (bool b : scaler.binary) put<std::uint8_t>(out, b ? 1 : 0);
    for (bool b : scaler.degenerate) put<std::uint8_t>(out, b ? 1 : 0);
    for (Timestamp t : data.origin_ts) put<std::int64_t>(out, to_unix(t));
    for (double v : data.x) put(out, v);
    for (double v : data.y) put(out, v);
}

CachedDataset read_cache(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw ValidationError("not a dataset cache file");
    }
    CachedDataset c;
    auto& d = c.data;
    d.lag = get<std::uint32_t>(in);
    d.horizon = static_cast<int>(get<std::uint32_t>(in));
    d.channels = get<std::uint32_t>(in);
    d.target_column = get<std::uint32_t>(in);
    const auto n = get<std::uint64_t>(in);
    if (get<std::uint64_t>(in) != schema_hash() || d.channels != kFeatureCount) {
        throw ValidationError("dataset cache schema does not match this build");
    }
    for (double& m : c.scaler.mean) m = get<double>(in);
    for (double& s : c.scaler.std) s = get<double>(in);
    for (auto&& b : c.scaler.binary) b = get<std::uint8_t>(in) != 0;
    for (auto&& b : c.scaler.degenerate) b = get<std::uint8_t>(in) != 0;
    d.origin_ts.resize(n);
    for (auto& t : d.origin_ts) t = from_unix(get<std::int64_t>(in));
    d.x.resize(n * d.channels * d.lag);
    for (double& v : d.x) v = get<double>(in);
    d.y.resize(n);
    for (double& v : d.y) v = get<double>(in);
    return c;
}

void write_cache(const std::filesystem::path& path, const WindowedDataset& data,
                 const ScalerParams& scaler) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io_error", "cannot write " + path.string());
    write_cache(out, data, scaler);
}

CachedDataset read_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + path.string());
    return read_cache(in);
}

}  // namespace edboard::dataset
