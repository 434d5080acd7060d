#include "adnet/io/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "adnet/error.hpp"

namespace adnet::io {
namespace {

std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

template <typename T>
T parse_int(std::string_view text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    fail(ErrorCode::ParseError, "bad integer '" + std::string(text) + "'");
  return v;
}

std::string str(std::uint64_t v) { return std::to_string(v); }

template <typename T>
void put(std::string& buf, T v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <typename T>
T get(std::string_view buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) fail(ErrorCode::ParseError, "truncated binary event log");
  char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

constexpr char kLogMagic[8] = {'A', 'D', 'N', 'E', 'T', 'L', 'O', 'G'};
constexpr std::uint32_t kLogVersion = 1;

Channel channel_from(std::string_view s) {
  for (auto c : {Channel::Single, Channel::Shared, Channel::InteractingOnly, Channel::DecoupledOnly})
    if (to_string(c) == s) return c;
  fail(ErrorCode::ParseError, "unknown channel '" + std::string(s) + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) fail(ErrorCode::IoError, "cannot format double");
  return {buf, ptr};
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    fail(ErrorCode::ParseError, "bad number '" + std::string(text) + "'");
  return v;
}

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const fs::path& path, std::string_view schema,
                     const std::vector<std::string>& columns, const Json& meta)
    : impl_(new Impl{open_out(path)}), columns_(columns.size()) {
  impl_->out << "# schema: " << schema << '\n';
  if (!meta.is_null()) impl_->out << "# meta: " << meta.dump() << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) impl_->out << (i ? "," : "") << columns[i];
  impl_->out << '\n';
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) fail(ErrorCode::LengthMismatch, "CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) impl_->out << (i ? "," : "") << cells[i];
  impl_->out << '\n';
  if (!impl_->out) fail(ErrorCode::IoError, "CSV write failed");
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  fail(ErrorCode::ParseError, "missing CSV column '" + std::string(name) + "'");
}

CsvTable read_csv(const fs::path& path) {
  const std::string text = slurp(path);
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# schema: ", 0) == 0) {
      table.schema = line.substr(10);
    } else if (line.rfind("# meta: ", 0) == 0) {
      table.meta = Json::parse(line.substr(8));
    } else if (line[0] == '#') {
      continue;
    } else if (!header) {
      table.columns = split(line);
      header = true;
    } else {
      auto cells = split(line);
      if (cells.size() != table.columns.size())
        fail(ErrorCode::ParseError, "CSV row width mismatch in '" + path.string() + "'");
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.schema.empty()) fail(ErrorCode::ParseError, "CSV without schema line");
  if (!header) fail(ErrorCode::ParseError, "CSV without header row");
  return table;
}

void write_event_log_csv(const fs::path& path, const EventLog& log) {
  CsvWriter w(path, "adnet.events.v1", {"t", "kind", "j", "k", "old", "new", "channel"});
  for (const Event& e : log.events)
    w.row({format_double(e.time), std::string(to_string(e.kind)), str(e.j), str(e.k),
           str(e.old_state), str(e.new_state), std::string(to_string(e.channel))});
}

EventLog read_event_log_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  if (t.schema != "adnet.events.v1") fail(ErrorCode::ParseError, "not an event log CSV");
  const std::size_t ct = t.column("t"), ckind = t.column("kind"), cj = t.column("j"),
                    ck = t.column("k"), cold = t.column("old"), cnew = t.column("new"),
                    cch = t.column("channel");
  EventLog log;
  for (const auto& r : t.rows) {
    Event e;
    e.time = parse_double(r[ct]);
    if (r[ckind] == "node") e.kind = EventKind::Node;
    else if (r[ckind] == "edge") e.kind = EventKind::Edge;
    else fail(ErrorCode::ParseError, "unknown event kind '" + r[ckind] + "'");
    e.j = parse_int<std::uint32_t>(r[cj]);
    e.k = parse_int<std::uint32_t>(r[ck]);
    e.old_state = parse_int<State>(r[cold]);
    e.new_state = parse_int<State>(r[cnew]);
    e.channel = channel_from(r[cch]);
    log.events.push_back(e);
  }
  return log;
}

void write_event_log_binary(const fs::path& path, const EventLog& log) {
  std::string buf(kLogMagic, sizeof(kLogMagic));
  put<std::uint32_t>(buf, kLogVersion);
  put<std::uint64_t>(buf, log.events.size());
  for (const Event& e : log.events) {
    put<double>(buf, e.time);
    put<std::uint8_t>(buf, static_cast<std::uint8_t>(e.kind));
    put<std::uint32_t>(buf, e.j);
    put<std::uint32_t>(buf, e.k);
    put<std::uint8_t>(buf, e.old_state);
    put<std::uint8_t>(buf, e.new_state);
    put<std::uint8_t>(buf, static_cast<std::uint8_t>(e.channel));
  }
  auto out = open_out(path, true);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(ErrorCode::IoError, "binary log write failed");
}

EventLog read_event_log_binary(const fs::path& path) {
  const std::string buf = slurp(path);
  if (buf.size() < sizeof(kLogMagic) || std::memcmp(buf.data(), kLogMagic, sizeof(kLogMagic)) != 0)
    fail(ErrorCode::ParseError, "not a binary event log");
  std::size_t pos = sizeof(kLogMagic);
  if (get<std::uint32_t>(buf, pos) != kLogVersion)
    fail(ErrorCode::ParseError, "unsupported binary event log version");
  const auto count = get<std::uint64_t>(buf, pos);
  EventLog log;
  log.events.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Event e;
    e.time = get<double>(buf, pos);
    const auto kind = get<std::uint8_t>(buf, pos);
    if (kind > 1) fail(ErrorCode::ParseError, "bad event kind in binary log");
    e.kind = static_cast<EventKind>(kind);
    e.j = get<std::uint32_t>(buf, pos);
    e.k = get<std::uint32_t>(buf, pos);
    e.old_state = get<std::uint8_t>(buf, pos);
    e.new_state = get<std::uint8_t>(buf, pos);
    const auto ch = get<std::uint8_t>(buf, pos);
    if (ch > 3) fail(ErrorCode::ParseError, "bad channel in binary log");
    e.channel = static_cast<Channel>(ch);
    log.events.push_back(e);
  }
  if (pos != buf.size()) fail(ErrorCode::ParseError, "trailing bytes in binary event log");
  return log;
}

void write_series_csv(const fs::path& path, const DiscrepancySeries& s) {
  CsvWriter w(path, "adnet.discrepancy.v1",
              {"t", "delta", "phi", "eta", "node_residual", "edge_residual"});
  for (std::size_t i = 0; i < s.times.size(); ++i)
    w.row({format_double(s.times[i]), format_double(s.delta[i]), format_double(s.phi[i]),
           format_double(s.eta[i]), format_double(s.node_residual[i]),
           format_double(s.edge_residual[i])});
}

void write_intensity_csv(const fs::path& path, const IntensityBoundReport& r) {
  CsvWriter w(path, "adnet.intensity-bound.v1",
              {"t", "lhs_node", "rhs_node", "lhs_edge", "rhs_edge"});
  for (std::size_t i = 0; i < r.times.size(); ++i)
    w.row({format_double(r.times[i]), format_double(r.lhs_node[i]), format_double(r.rhs_node[i]),
           format_double(r.lhs_edge[i]), format_double(r.rhs_edge[i])});
}

void write_measure_csv(const fs::path& path, const MeasureSample& mu) {
  const Json meta = {{"M", mu.size()},
                     {"horizon", format_double(mu.horizon)},
                     {"generation", mu.generation},
                     {"seed", mu.seed}};
  CsvWriter w(path, "adnet.measure.v1", {"record", "particle", "x", "y", "weight", "time", "state"},
              meta);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Particle& p = mu.particles[i];
    w.row({"particle", str(i), format_double(p.position[0]), format_double(p.position[1]),
           format_double(p.weight), "", str(p.path.initial)});
    for (const Jump& j : p.path.jumps)
      w.row({"jump", str(i), "", "", "", format_double(j.time), str(j.state)});
  }
}

MeasureSample read_measure_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  if (t.schema != "adnet.measure.v1" || !t.meta.is_object())
    fail(ErrorCode::ParseError, "not a measure CSV");
  MeasureSample mu;
  try {
    mu.horizon = parse_double(t.meta.at("horizon").get<std::string>());
    mu.generation = t.meta.at("generation").get<std::uint64_t>();
    mu.seed = t.meta.at("seed").get<std::uint64_t>();
    mu.particles.resize(t.meta.at("M").get<std::size_t>());
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, std::string("bad measure metadata: ") + e.what());
  }
  const std::size_t crec = t.column("record"), cid = t.column("particle"), cx = t.column("x"),
                    cy = t.column("y"), cw = t.column("weight"), ct = t.column("time"),
                    cs = t.column("state");
  for (const auto& r : t.rows) {
    const auto i = parse_int<std::size_t>(r[cid]);
    if (i >= mu.size()) fail(ErrorCode::ParseError, "particle id out of range");
    Particle& p = mu.particles[i];
    if (r[crec] == "particle") {
      p.position = {parse_double(r[cx]), parse_double(r[cy])};
      p.weight = parse_double(r[cw]);
      p.path.initial = parse_int<State>(r[cs]);
      p.path.horizon = mu.horizon;
    } else if (r[crec] == "jump") {
      p.path.jumps.push_back({parse_double(r[ct]), parse_int<State>(r[cs])});
    } else {
      fail(ErrorCode::ParseError, "unknown measure record '" + r[crec] + "'");
    }
  }
  return mu;
}

void write_paths_csv(const fs::path& path, const std::vector<TrajectoryPath>& paths,
                     const std::vector<Position>& positions) {
  CsvWriter w(path, "adnet.paths.v1", {"node", "x", "y", "time", "state"});
  for (std::size_t j = 0; j < paths.size(); ++j) {
    const Position x = j < positions.size() ? positions[j] : Position{0.0, 0.0};
    w.row({str(j), format_double(x[0]), format_double(x[1]), "0", str(paths[j].initial)});
    for (const Jump& jump : paths[j].jumps)
      w.row({str(j), format_double(x[0]), format_double(x[1]), format_double(jump.time),
             str(jump.state)});
  }
}

void write_pde_csv(const fs::path& density_path, const fs::path& field_path,
                   const PdeSolution& solution) {
  {
    CsvWriter w(density_path, "adnet.pair-density.v1", {"t", "i", "j", "alpha", "a", "p"});
    for (const PdeFrame& f : solution.frames) {
      const PairDensityGrid& g = f.density;
      for (std::size_t i = 0; i < g.Q; ++i)
        for (std::size_t j = 0; j < g.Q; ++j)
          for (std::size_t alpha = 0; alpha < g.G; ++alpha)
            for (std::size_t a = 0; a < g.E; ++a)
              w.row({format_double(f.time), str(i), str(j), str(alpha), str(a),
                     format_double(g.at(i, j, alpha, a))});
    }
  }
  CsvWriter w(field_path, "adnet.field.v1", {"t", "j", "alpha", "a", "G"});
  for (const PdeFrame& f : solution.frames)
    for (std::size_t j = 0; j < f.field.Q; ++j)
      for (std::size_t alpha = 0; alpha < f.field.G; ++alpha)
        for (std::size_t a = 0; a < f.field.E; ++a)
          w.row({format_double(f.time), str(j), str(alpha), str(a),
                 format_double(f.field.at(j, alpha, a))});
}

void write_json(const fs::path& path, const Json& value) {
  auto out = open_out(path);
  out << value.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "JSON write failed");
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(slurp(path));
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, "bad JSON in '" + path.string() + "': " + e.what());
  }
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::IoError, "SHA-256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(slurp(path)); }

Json write_manifest(const fs::path& dir, const Json& plan) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
      files.push_back(fs::relative(entry.path(), dir));
  std::sort(files.begin(), files.end());
  Json list = Json::array();
  for (const fs::path& rel : files) {
    const std::string bytes = slurp(dir / rel);
    list.push_back({{"path", rel.generic_string()},
                    {"sha256", sha256_hex(bytes)},
                    {"bytes", bytes.size()}});
  }
  Json manifest = {{"schema", "adnet.manifest.v1"}, {"plan", plan}, {"files", list}};
  write_json(dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace adnet::io
