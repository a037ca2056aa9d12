#include "vocspace/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vocspace/error.hpp"

namespace vocspace::csv {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::string format(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view field, std::string_view what,
                    std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw InputError("invalid " + std::string(what) + " '" + std::string(field) +
                     "', line " + std::to_string(line_no));
  }
  return v;
}

std::int64_t parse_int(std::string_view field, std::string_view what,
                       std::size_t line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw InputError("invalid " + std::string(what) + " '" + std::string(field) +
                     "', line " + std::to_string(line_no));
  }
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Table Table::parse(std::istream& in, const std::filesystem::path& origin) {
  Table t;
  t.origin_ = origin.string();
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line);
    if (t.header_.empty()) {
      for (auto f : fields) t.header_.emplace_back(f);
      continue;
    }
    if (fields.size() != t.header_.size()) {
      throw InputError(t.origin_ + ": expected " +
                       std::to_string(t.header_.size()) + " fields, got " +
                       std::to_string(fields.size()) + ", line " +
                       std::to_string(line_no));
    }
    t.rows_.emplace_back(fields.begin(), fields.end());
    t.lines_.push_back(line_no);
  }
  if (t.header_.empty()) throw InputError(t.origin_ + ": missing header");
  return t;
}

Table Table::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return parse(in, path);
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw InputError(origin_ + ": missing column '" + std::string(name) + "'");
}

bool Table::has_column(std::string_view name) const {
  for (const auto& h : header_) {
    if (h == name) return true;
  }
  return false;
}

}  // namespace vocspace::csv
