#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "irgld/branching.hpp"

namespace irgld {

namespace {

constexpr const char* kPoolSchema = "irgld.pool/1";

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("pool file: truncated record");
  return v;
}

}  // namespace

// One JSON header line, then fixed-layout little-endian records.
void write_pool(const TreePool& pool, std::ostream& os) {
  nlohmann::json header = {{"schema", kPoolSchema},
                           {"params", to_json(pool.params())},
                           {"M", pool.count()},
                           {"size_cap", pool.size_cap()},
                           {"weight_store_cap", pool.weight_store_cap()},
                           {"seed", pool.seed()}};
  os << header.dump() << '\n';
  for (std::size_t i = 0; i < pool.count(); ++i) {
    const auto w = pool.weights(i);
    put<std::uint32_t>(os, pool.size(i));
    put<std::uint8_t>(os, pool.censored(i) ? 1 : 0);
    put<std::uint32_t>(os, pool.generations(i));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(w.size()));
    os.write(reinterpret_cast<const char*>(w.data()), static_cast<std::streamsize>(w.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("pool file: write failed");
}

TreePool read_pool(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("pool file: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("pool file: bad header: ") + e.what());
  }
  if (header.value("schema", "") != kPoolSchema) throw std::runtime_error("pool file: unknown schema");
  TreePool pool(params_from_json(header.at("params")), header.at("size_cap").get<std::uint32_t>(),
                header.at("weight_store_cap").get<std::uint32_t>(), header.at("seed").get<std::uint64_t>());
  const auto m = header.at("M").get<std::size_t>();
  ProgenySample s;
  for (std::size_t i = 0; i < m; ++i) {
    s.size = get<std::uint32_t>(is);
    s.censored = get<std::uint8_t>(is) != 0;
    s.generations = get<std::uint32_t>(is);
    s.weights.resize(get<std::uint32_t>(is));
    if (!is.read(reinterpret_cast<char*>(s.weights.data()),
                 static_cast<std::streamsize>(s.weights.size() * sizeof(double))))
      throw std::runtime_error("pool file: truncated weights");
    pool.push_back(s);
  }
  return pool;
}

void save_pool(const TreePool& pool, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_pool(pool, os);
}

TreePool load_pool(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open pool file '" + path + "'");
  return read_pool(is);
}

}  // namespace irgld
