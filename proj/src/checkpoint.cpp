#include "mgcn/checkpoint.hpp"

#include "mgcn/errors.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace mgcn {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

const Matrix& Checkpoint::tensor(const std::string& name) const {
    for (const auto& [key, value] : tensors)
        if (key == name) return value;
    throw ContractError("checkpoint has no tensor '" + name + "'");
}

namespace {

constexpr std::array<char, 8> magic{'M', 'G', 'C', 'N', 'C', 'K', 'P', 'T'};

template <class T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DatasetError("truncated checkpoint: " + path.string());
    return v;
}

std::string get_bytes(std::ifstream& in, std::uint64_t count, const std::filesystem::path& path) {
    if (count > (1ull << 32)) throw DatasetError("corrupt checkpoint (length field): " + path.string());
    std::string s(count, '\0');
    if (count && !in.read(s.data(), static_cast<std::streamsize>(count)))
        throw DatasetError("truncated checkpoint: " + path.string());
    return s;
}

} // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetError("cannot write checkpoint: " + path.string());
    const nlohmann::json header{{"config", to_json(ck.config)},
                                {"n", ck.n},
                                {"class_count", ck.class_count},
                                {"view_dims", ck.view_dims}};
    const std::string text = header.dump();
    out.write(magic.data(), magic.size());
    put<std::uint32_t>(out, checkpoint_version);
    put<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    put<std::uint64_t>(out, ck.tensors.size());
    for (const auto& [name, m] : ck.tensors) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint64_t>(out, m.rows());
        put<std::uint64_t>(out, m.cols());
        const auto data = m.data();
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
    }
    if (!out) throw DatasetError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open checkpoint: " + path.string());
    std::array<char, 8> head{};
    if (!in.read(head.data(), head.size()) || head != magic)
        throw DatasetError("not a checkpoint file (bad magic): " + path.string());
    const auto version = get<std::uint32_t>(in, path);
    if (version != checkpoint_version)
        throw DatasetError("unsupported checkpoint version " + std::to_string(version) + ": " + path.string());

    Checkpoint ck;
    const auto header_len = get<std::uint64_t>(in, path);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(get_bytes(in, header_len, path));
        ck.config = train_config_from_json(header.at("config"));
        ck.n = header.at("n").get<std::size_t>();
        ck.class_count = header.at("class_count").get<int>();
        ck.view_dims = header.at("view_dims").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError("corrupt checkpoint header in " + path.string() + ": " + e.what());
    }

    const auto count = get<std::uint64_t>(in, path);
    for (std::uint64_t t = 0; t < count; ++t) {
        const auto name_len = get<std::uint32_t>(in, path);
        std::string name = get_bytes(in, name_len, path);
        const auto rows = get<std::uint64_t>(in, path);
        const auto cols = get<std::uint64_t>(in, path);
        if (rows == 0 || cols == 0 || rows * cols > (1ull << 31))
            throw DatasetError("corrupt checkpoint tensor '" + name + "': " + path.string());
        std::vector<double> values(rows * cols);
        if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double))))
            throw DatasetError("truncated checkpoint: " + path.string());
        ck.tensors.emplace_back(std::move(name), Matrix(rows, cols, std::move(values)));
    }
    return ck;
}

} // namespace mgcn
