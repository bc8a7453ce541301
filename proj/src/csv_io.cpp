#include "windplan/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "windplan/errors.hpp"

namespace windplan {

namespace fs = std::filesystem;

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  return std::nullopt;
}

std::size_t CsvTable::column(std::string_view name, const std::string& source) const {
  if (auto k = find_column(name)) return *k;
  throw ValidationError(source + ": missing column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
  CsvTable table;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) {
      if (table.header.empty()) {
        table.header = std::move(row);
      } else {
        if (row.size() != table.header.size()) {
          throw ValidationError(source + ": line " + std::to_string(line) + " has " + std::to_string(row.size()) +
                                " fields, header has " + std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(row));
      }
    }
    row.clear();
    ++line;
  };

  std::size_t start = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") start = 3;  // UTF-8 BOM
  for (std::size_t k = start; k < text.size(); ++k) {
    const char ch = text[k];
    if (in_quotes) {
      if (ch == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field.push_back('"');
          ++k;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\n') {
      end_row();
    } else if (ch == '\r') {
      // tolerated before \n
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
  if (in_quotes) throw ValidationError(source + ": unterminated quoted field");
  if (!field.empty() || !row.empty()) end_row();
  if (table.header.empty()) throw ValidationError(source + ": empty file");
  return table;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return buffer.str();
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_text_file(path), path.filename().string()); }

void write_text_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("error writing " + path.string());
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ValidationError(context + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view text, const std::string& context) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ValidationError(context + ": not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += '"';
  return out;
}

namespace {

std::string ctx(const std::string& file, std::size_t row, std::string_view col) {
  return file + " row " + std::to_string(row + 2) + " column " + std::string(col);
}

std::vector<CandidateSite> read_candidates(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::string f = kCandidatesFile;
  const auto c_id = t.column("site_id", f), c_muni = t.column("municipality_id", f), c_lat = t.column("lat", f),
             c_lon = t.column("lon", f), c_cap = t.column("capacity_mw", f), c_lcoe = t.column("lcoe_ct_kwh", f),
             c_scen = t.column("scenicness", f), c_flh = t.column("full_load_hours", f);
  const auto c_len = t.find_column("network_length_km");
  std::vector<CandidateSite> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    CandidateSite s;
    s.site_id = parse_int(row[c_id], ctx(f, r, "site_id"));
    s.municipality_id = parse_int(row[c_muni], ctx(f, r, "municipality_id"));
    s.lat = parse_double(row[c_lat], ctx(f, r, "lat"));
    s.lon = parse_double(row[c_lon], ctx(f, r, "lon"));
    s.capacity_mw = parse_double(row[c_cap], ctx(f, r, "capacity_mw"));
    s.lcoe_ct_kwh = parse_double(row[c_lcoe], ctx(f, r, "lcoe_ct_kwh"));
    s.scenicness = parse_double(row[c_scen], ctx(f, r, "scenicness"));
    s.full_load_hours = parse_double(row[c_flh], ctx(f, r, "full_load_hours"));
    if (c_len && !row[*c_len].empty()) s.network_length_km = parse_double(row[*c_len], ctx(f, r, "network_length_km"));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Municipality> read_municipalities(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::string f = kMunicipalitiesFile;
  const auto c_id = t.column("municipality_id", f), c_name = t.column("name", f), c_pop = t.column("population", f),
             c_reg = t.column("region_tag", f), c_state = t.column("state_id", f), c_area = t.column("area_km2", f);
  std::vector<Municipality> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    Municipality m;
    m.municipality_id = parse_int(row[c_id], ctx(f, r, "municipality_id"));
    m.name = row[c_name];
    m.population = parse_double(row[c_pop], ctx(f, r, "population"));
    try {
      m.region = parse_region(row[c_reg]);
    } catch (const ValidationError& e) {
      throw ValidationError(ctx(f, r, "region_tag") + ": " + e.what());
    }
    m.state_id = parse_int(row[c_state], ctx(f, r, "state_id"));
    m.area_km2 = parse_double(row[c_area], ctx(f, r, "area_km2"));
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ExistingTurbine> read_existing(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::string f = kExistingFile;
  const auto c_id = t.column("turbine_id", f), c_muni = t.column("municipality_id", f), c_lat = t.column("lat", f),
             c_lon = t.column("lon", f), c_cap = t.column("capacity_mw", f);
  std::vector<ExistingTurbine> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    ExistingTurbine e;
    e.turbine_id = parse_int(row[c_id], ctx(f, r, "turbine_id"));
    e.municipality_id = parse_int(row[c_muni], ctx(f, r, "municipality_id"));
    e.lat = parse_double(row[c_lat], ctx(f, r, "lat"));
    e.lon = parse_double(row[c_lon], ctx(f, r, "lon"));
    e.capacity_mw = parse_double(row[c_cap], ctx(f, r, "capacity_mw"));
    out.push_back(e);
  }
  return out;
}

std::vector<Transformer> read_transformers(const fs::path& path, IngestReport* report) {
  const CsvTable t = read_csv(path);
  const std::string f = kTransformersFile;
  const auto c_id = t.column("transformer_id", f), c_lat = t.column("lat", f), c_lon = t.column("lon", f),
             c_kv = t.column("voltage_kv", f);
  std::vector<Transformer> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    Transformer tr;
    tr.transformer_id = parse_int(row[c_id], ctx(f, r, "transformer_id"));
    tr.lat = parse_double(row[c_lat], ctx(f, r, "lat"));
    tr.lon = parse_double(row[c_lon], ctx(f, r, "lon"));
    const double kv = parse_double(row[c_kv], ctx(f, r, "voltage_kv"));
    if (kv != 20.0 && kv != 110.0) {
      if (report) ++report->transformers_dropped_by_voltage;
      continue;
    }
    tr.voltage_kv = static_cast<int>(kv);
    out.push_back(tr);
  }
  return out;
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("missing input file " + path.string());
}

}  // namespace

Instance read_instance(const fs::path& dir, IngestReport* report) {
  if (!fs::is_directory(dir)) throw IoError("instance directory not found: " + dir.string());
  for (const char* name : {kCandidatesFile, kMunicipalitiesFile, kExistingFile, kTransformersFile}) {
    require_file(dir / name);
  }
  Instance inst;
  inst.candidates = read_candidates(dir / kCandidatesFile);
  inst.municipalities = read_municipalities(dir / kMunicipalitiesFile);
  inst.existing = read_existing(dir / kExistingFile);
  inst.transformers = read_transformers(dir / kTransformersFile, report);
  if (fs::is_regular_file(dir / "metadata.txt")) inst.metadata = read_text_file(dir / "metadata.txt");
  assign_existing_capacity(inst);
  return inst;
}

void write_candidates_csv(const std::vector<CandidateSite>& candidates, const fs::path& path) {
  const bool with_length = std::all_of(candidates.begin(), candidates.end(),
                                       [](const CandidateSite& c) { return c.network_length_km.has_value(); }) &&
                           !candidates.empty();
  std::string out = "site_id,municipality_id,lat,lon,capacity_mw,lcoe_ct_kwh,scenicness,full_load_hours";
  if (with_length) out += ",network_length_km";
  out += '\n';
  for (const auto& c : candidates) {
    out += std::to_string(c.site_id) + ',' + std::to_string(c.municipality_id) + ',' + format_double(c.lat) + ',' +
           format_double(c.lon) + ',' + format_double(c.capacity_mw) + ',' + format_double(c.lcoe_ct_kwh) + ',' +
           format_double(c.scenicness) + ',' + format_double(c.full_load_hours);
    if (with_length) out += ',' + format_double(*c.network_length_km);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_instance(const Instance& instance, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  write_candidates_csv(instance.candidates, dir / kCandidatesFile);

  std::string munis = "municipality_id,name,population,region_tag,state_id,area_km2\n";
  for (const auto& m : instance.municipalities) {
    munis += std::to_string(m.municipality_id) + ',' + csv_escape(m.name) + ',' + format_double(m.population) + ',' +
             to_string(m.region) + ',' + std::to_string(m.state_id) + ',' + format_double(m.area_km2) + '\n';
  }
  write_text_file(dir / kMunicipalitiesFile, munis);

  std::string existing = "turbine_id,municipality_id,lat,lon,capacity_mw\n";
  for (const auto& t : instance.existing) {
    existing += std::to_string(t.turbine_id) + ',' + std::to_string(t.municipality_id) + ',' + format_double(t.lat) +
                ',' + format_double(t.lon) + ',' + format_double(t.capacity_mw) + '\n';
  }
  write_text_file(dir / kExistingFile, existing);

  std::string transformers = "transformer_id,lat,lon,voltage_kv\n";
  for (const auto& t : instance.transformers) {
    transformers += std::to_string(t.transformer_id) + ',' + format_double(t.lat) + ',' + format_double(t.lon) + ',' +
                    std::to_string(t.voltage_kv) + '\n';
  }
  write_text_file(dir / kTransformersFile, transformers);

  if (!instance.metadata.empty()) write_text_file(dir / "metadata.txt", instance.metadata);
}

}  // namespace windplan
