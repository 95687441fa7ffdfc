#include "conflow/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "conflow/error.hpp"

namespace conflow {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t to_little_endian(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((bits >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
  } else {
    return bits;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::string take_value(const std::string& token, const std::string& key) {
  if (token.rfind(key + "=", 0) != 0) {
    throw Error(ErrorKind::io, "field header: expected '" + key + "=' but got '" + token + "'");
  }
  return token.substr(key.size() + 1);
}

}  // namespace

std::string field_header(const Grid& grid) {
  std::string h = "conflow-field v1 n=" + std::to_string(grid.ambient_n()) +
                  " dims=" + std::to_string(grid.active_dims()) + " shape=";
  for (int a = 0; a < grid.active_dims(); ++a) {
    if (a) h += ',';
    h += std::to_string(grid.points(a));
  }
  h += " period=";
  for (int a = 0; a < grid.active_dims(); ++a) {
    if (a) h += ',';
    h += format_double(grid.period(a));
  }
  return h;
}

void write_field(std::ostream& os, const ScalarField& field) {
  os << field_header(field.grid()) << '\n';
  for (double v : field.values()) {
    std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    os.write(bytes, 8);
  }
  if (!os) throw Error(ErrorKind::io, "failed writing field data");
}

void write_field(const std::string& path, const ScalarField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  write_field(os, field);
}

ScalarField read_field(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw Error(ErrorKind::io, "missing field header");
  std::istringstream hs(header);
  std::string magic, version, n_tok, dims_tok, shape_tok, period_tok, extra;
  hs >> magic >> version >> n_tok >> dims_tok >> shape_tok >> period_tok;
  if (magic != "conflow-field" || version != "v1") {
    throw Error(ErrorKind::io, "not a conflow-field v1 snapshot");
  }
  if (hs >> extra) throw Error(ErrorKind::io, "unexpected token in field header: " + extra);

  GridSpec spec;
  try {
    spec.ambient_n = std::stoi(take_value(n_tok, "n"));
    const int dims = std::stoi(take_value(dims_tok, "dims"));
    for (const auto& s : split(take_value(shape_tok, "shape"), ',')) spec.points.push_back(std::stoi(s));
    for (const auto& s : split(take_value(period_tok, "period"), ',')) spec.periods.push_back(std::stod(s));
    if (dims != spec.active_dims()) throw Error(ErrorKind::io, "field header: dims/shape disagree");
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::io, std::string("malformed field header: ") + e.what());
  }
  GridPtr grid = make_grid(std::move(spec));

  std::vector<double> values(grid->size());
  for (double& v : values) {
    char bytes[8];
    if (!is.read(bytes, 8)) throw Error(ErrorKind::io, "truncated field data");
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes, 8);
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  return ScalarField(std::move(grid), std::move(values));
}

ScalarField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open field file '" + path + "'");
  return read_field(is);
}

}  // namespace conflow
