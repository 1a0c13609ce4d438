#include "latticetopo/grid_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ltopo {

namespace {

constexpr char kMagic[4] = {'L', 'T', 'G', 'F'};

uint32_t read_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint16_t read_u16le(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

double read_f64le(const unsigned char* p) {
  uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = bits << 8 | p[i];
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void append_u16le(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8 & 0xff));
}

void append_u32le(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>(v >> 8 * i & 0xff));
}

void append_f64le(std::string& s, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>(bits >> 8 * i & 0xff));
}

ScalarField parse_binary(const std::string& raw, const std::string& name) {
  if (raw.size() < 16) throw ContractError(name + ": truncated binary header");
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  const uint16_t version = read_u16le(p + 4);
  if (version != 1)
    throw ContractError(name + ": unsupported format version " +
                        std::to_string(version));
  const uint32_t rows = read_u32le(p + 8);
  const uint32_t cols = read_u32le(p + 12);
  if (rows == 0 || cols == 0)
    throw ContractError(name + ": zero dimension in header");
  const size_t need = 16 + static_cast<size_t>(rows) * cols * 8;
  if (raw.size() != need)
    throw ContractError(name + ": payload size mismatch for " +
                        std::to_string(rows) + "x" + std::to_string(cols) +
                        " grid");
  ScalarField field(static_cast<int>(rows), static_cast<int>(cols));
  for (size_t i = 0; i < static_cast<size_t>(rows) * cols; ++i) {
    const double v = read_f64le(p + 16 + 8 * i);
    if (!std::isfinite(v))
      throw ContractError(name + ": non-finite value at row " +
                          std::to_string(i / cols) + ", col " +
                          std::to_string(i % cols));
    field.values[i] = v;
  }
  return field;
}

ScalarField parse_csv(const std::string& raw, const std::string& name) {
  std::istringstream in(raw);
  std::string line;
  int declared_rows = -1, declared_cols = -1;
  std::vector<std::vector<double>> grid;
  int lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first_content && line[0] == '#') {
      if (std::sscanf(line.c_str(), "# rows=%d cols=%d", &declared_rows,
                      &declared_cols) != 2)
        throw ContractError(name + ": malformed header line: " + line);
      first_content = false;
      continue;
    }
    first_content = false;
    std::vector<double> row;
    const char* s = line.data();
    const char* end = s + line.size();
    int col = 0;
    while (true) {
      while (s < end && (*s == ' ' || *s == '\t')) ++s;
      double v = 0;
      const auto [next, ec] = std::from_chars(s, end, v);
      if (ec != std::errc{})
        throw ContractError(name + ": non-numeric entry at row " +
                            std::to_string(grid.size()) + ", col " +
                            std::to_string(col) + " (line " +
                            std::to_string(lineno) + ")");
      if (!std::isfinite(v))
        throw ContractError(name + ": non-finite value at row " +
                            std::to_string(grid.size()) + ", col " +
                            std::to_string(col));
      row.push_back(v);
      ++col;
      s = next;
      while (s < end && (*s == ' ' || *s == '\t')) ++s;
      if (s == end) break;
      if (*s != ',')
        throw ContractError(name + ": expected ',' at row " +
                            std::to_string(grid.size()) + ", col " +
                            std::to_string(col));
      ++s;
    }
    if (!grid.empty() && row.size() != grid.front().size())
      throw ContractError(name + ": row " + std::to_string(grid.size()) +
                          " has " + std::to_string(row.size()) +
                          " entries, expected " +
                          std::to_string(grid.front().size()));
    grid.push_back(std::move(row));
  }
  if (grid.empty()) throw ContractError(name + ": no data rows");
  const int rows = static_cast<int>(grid.size());
  const int cols = static_cast<int>(grid.front().size());
  if (declared_rows >= 0 && (declared_rows != rows || declared_cols != cols))
    throw ContractError(name + ": dimension mismatch: header says " +
                        std::to_string(declared_rows) + "x" +
                        std::to_string(declared_cols) + ", data is " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  ScalarField field(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) field.at(r, c) = grid[r][c];
  return field;
}

}  // namespace

ScalarField load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open " + path.string());
  std::string raw((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (raw.size() >= 4 && std::memcmp(raw.data(), kMagic, 4) == 0)
    return parse_binary(raw, path.string());
  return parse_csv(raw, path.string());
}

void save_field_binary(const ScalarField& field, const std::filesystem::path& path) {
  std::string out;
  out.reserve(16 + static_cast<size_t>(field.size()) * 8);
  out.append(kMagic, 4);
  append_u16le(out, 1);
  append_u16le(out, 0);
  append_u32le(out, static_cast<uint32_t>(field.rows));
  append_u32le(out, static_cast<uint32_t>(field.cols));
  for (double v : field.values) append_f64le(out, v);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ContractError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw ContractError("write failed: " + path.string());
}

void save_field_csv(const ScalarField& field, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ContractError("cannot write " + path.string());
  f << "# rows=" << field.rows << " cols=" << field.cols << "\n";
  f.precision(17);
  for (int r = 0; r < field.rows; ++r) {
    for (int c = 0; c < field.cols; ++c) {
      if (c) f << ',';
      f << field.at(r, c);
    }
    f << "\n";
  }
  if (!f) throw ContractError("write failed: " + path.string());
}

}  // namespace ltopo
