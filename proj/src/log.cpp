#include "kfm/log.hpp"

#include <fstream>
#include <sstream>

namespace kfm {

using nlohmann::json;

json to_json(const Record& r) {
  return json{{"t", r.t_ms}, {"kind", r.kind}, {"payload", r.payload}};
}

Record record_from_json(const json& j) {
  Record r;
  r.t_ms = j.at("t").get<std::int64_t>();
  r.kind = j.at("kind").get<std::string>();
  r.payload = j.at("payload");
  return r;
}

std::string serialize_records(const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<Record> parse_records(std::istream& in) {
  std::vector<Record> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw CorruptFile("bad record on line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return out;
}

void write_records(const std::string& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open '" + path + "' for writing");
  out << serialize_records(records);
  if (!out) throw IoFailure("short write to '" + path + "'");
}

std::vector<Record> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open '" + path + "'");
  return parse_records(in);
}

}  // namespace kfm
