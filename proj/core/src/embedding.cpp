#include "vocspace/embedding.hpp"

#include "vocspace/csv.hpp"
#include "vocspace/error.hpp"

namespace vocspace {

std::string serialize_embedding(const Embedding& e) {
  if (e.coords.rows() != e.info.size() || (e.size() > 0 && e.coords.cols() != 2)) {
    throw InputError("embedding coordinates do not match its metadata");
  }
  std::string out(kEmbeddingHeader);
  out += '\n';
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto& m = e.info[i];
    out += m.clip_id + ',' + m.recording_id + ',' + m.infant_id + ',' +
           std::to_string(m.age_months) + ',' + std::string(to_string(m.label)) + ',' +
           csv::format(e.coords(i, 0)) + ',' + csv::format(e.coords(i, 1)) + '\n';
  }
  return out;
}

Embedding parse_embedding(std::istream& in, std::string_view origin) {
  const auto table = csv::Table::parse(in, std::string(origin));
  const auto c_id = table.column("clip_id");
  const auto c_rec = table.column("recording_id");
  const auto c_inf = table.column("infant_id");
  const auto c_age = table.column("age_months");
  const auto c_cls = table.column("class");
  const auto c_x = table.column("x");
  const auto c_y = table.column("y");
  Embedding e;
  e.coords = Matrix(table.size(), 2);
  e.info.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table.row(i);
    const auto line = table.line_of(i);
    ClipInfo info;
    info.clip_id = r[c_id];
    info.recording_id = r[c_rec];
    info.infant_id = r[c_inf];
    info.age_months = static_cast<int>(csv::parse_int(r[c_age], "age_months", line));
    info.label = parse_class(r[c_cls]);
    e.coords(i, 0) = csv::parse_double(r[c_x], "x", line);
    e.coords(i, 1) = csv::parse_double(r[c_y], "y", line);
    e.info.push_back(std::move(info));
  }
  return e;
}

}  // namespace vocspace
