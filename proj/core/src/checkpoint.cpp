#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "deepratio/ratio_net.hpp"

namespace deepratio::net {

namespace {

constexpr char kMagic[8] = {'D', 'R', 'N', 'E', 'T', '0', '1', '\0'};

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(v >> (8 * b));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("checkpoint truncated");
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    return v;
}

nlohmann::json config_to_json(const NetConfig& c) {
    return {{"in_dim", c.in_dim},     {"out_dim", c.out_dim},         {"n_layers", c.n_layers},
            {"width", c.width},       {"leaky_slope", c.leaky_slope}, {"activate_last_hidden", c.activate_last_hidden}};
}

NetConfig config_from_json(const nlohmann::json& j) {
    NetConfig c;
    c.in_dim = j.at("in_dim").get<std::size_t>();
    c.out_dim = j.at("out_dim").get<std::size_t>();
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.width = j.at("width").get<std::size_t>();
    c.leaky_slope = j.at("leaky_slope").get<double>();
    c.activate_last_hidden = j.value("activate_last_hidden", false);
    c.validate();
    return c;
}

}  // namespace

void save_binary(const RatioNetwork& net, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write(kMagic, sizeof kMagic);
    const auto& c = net.config;
    put_u64(os, c.in_dim);
    put_u64(os, c.out_dim);
    put_u64(os, c.n_layers);
    put_u64(os, c.width);
    put_u64(os, std::bit_cast<std::uint64_t>(c.leaky_slope));
    put_u64(os, c.activate_last_hidden ? 1 : 0);
    const auto flat = net.params.flatten();
    put_u64(os, flat.size());
    for (double v : flat) put_u64(os, std::bit_cast<std::uint64_t>(v));
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

RatioNetwork load_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error(path.string() + " is not a network checkpoint");
    NetConfig c;
    c.in_dim = get_u64(is);
    c.out_dim = get_u64(is);
    c.n_layers = get_u64(is);
    c.width = get_u64(is);
    c.leaky_slope = std::bit_cast<double>(get_u64(is));
    c.activate_last_hidden = get_u64(is) != 0;
    RatioNetwork net = zero_network(c);
    const std::uint64_t count = get_u64(is);
    if (count != net.params.size()) throw std::runtime_error("checkpoint parameter count mismatch");
    std::vector<double> flat(count);
    for (auto& v : flat) v = std::bit_cast<double>(get_u64(is));
    net.params.assign(flat);
    return net;
}

void save_json(const RatioNetwork& net, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "deepratio-net";
    j["config"] = config_to_json(net.config);
    j["params"] = net.params.flatten();  // shortest round-trip representation, <= 17 digits
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << j.dump() << '\n';
}

RatioNetwork load_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    const auto j = nlohmann::json::parse(is);
    RatioNetwork net = zero_network(config_from_json(j.at("config")));
    net.params.assign(j.at("params").get<std::vector<double>>());
    return net;
}

}  // namespace deepratio::net
