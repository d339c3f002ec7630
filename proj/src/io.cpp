#include "omspec/io.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "omspec/errors.hpp"

namespace omspec {

namespace {

constexpr const char* kMagic = "# omspec-spectrum v1";

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string current_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_spectrum_file(const std::string& path, const Spectrum& spectrum,
                         const std::map<std::string, std::string>& metadata) {
  if (spectrum.points.empty()) {
    throw IoError("write_spectrum_file: empty spectrum");
  }
  Spectrum sorted = spectrum;
  std::sort(sorted.points.begin(), sorted.points.end(),
            [](const SpectrumPoint& a, const SpectrumPoint& b) {
              return a.detuning < b.detuning;
            });
  const bool with_sigma = sorted.has_sigma();
  std::ofstream out(path);
  if (!out) {
    throw IoError("write_spectrum_file: cannot open " + path);
  }
  out << kMagic << "\n";
  out << "# timestamp = " << current_timestamp() << "\n";
  for (const auto& [key, value] : metadata) {
    if (key == "timestamp" || key == "columns") continue;
    out << "# " << key << " = " << value << "\n";
  }
  out << "# columns = detuning value" << (with_sigma ? " sigma" : "") << "\n";
  out << std::setprecision(17);
  for (const auto& p : sorted.points) {
    out << p.detuning << " " << p.value;
    if (with_sigma) out << " " << p.sigma;
    out << "\n";
  }
  if (!out) {
    throw IoError("write_spectrum_file: write failed for " + path);
  }
}

SpectrumFile read_spectrum_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("read_spectrum_file: cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line) || trim(line) != kMagic) {
    throw IoError("read_spectrum_file: missing header magic in " + path);
  }
  SpectrumFile file;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto eq = t.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(t.substr(1, eq - 1));
        const std::string value = trim(t.substr(eq + 1));
        if (!key.empty()) file.metadata[key] = value;
      }
      continue;
    }
    std::istringstream row(t);
    SpectrumPoint p;
    if (!(row >> p.detuning >> p.value)) {
      throw IoError("read_spectrum_file: malformed row '" + t + "'");
    }
    double sigma;
    if (row >> sigma) p.sigma = sigma;
    std::string rest;
    if (row >> rest) {
      throw IoError("read_spectrum_file: trailing fields in row '" + t + "'");
    }
    if (p.value < 0.0) {
      throw IoError("read_spectrum_file: negative spectrum value");
    }
    file.spectrum.points.push_back(p);
  }
  if (file.spectrum.points.empty()) {
    throw IoError("read_spectrum_file: no data rows in " + path);
  }
  std::sort(file.spectrum.points.begin(), file.spectrum.points.end(),
            [](const SpectrumPoint& a, const SpectrumPoint& b) {
              return a.detuning < b.detuning;
            });
  for (size_t i = 1; i < file.spectrum.points.size(); ++i) {
    if (!(file.spectrum.points[i].detuning >
          file.spectrum.points[i - 1].detuning)) {
      throw IoError("read_spectrum_file: duplicate detuning " +
                    std::to_string(file.spectrum.points[i].detuning));
    }
  }
  return file;
}

void write_state_file(const std::string& path, const StateVariant& state) {
  nlohmann::json j;
  if (std::holds_alternative<PhononDistribution>(state)) {
    const auto& p = std::get<PhononDistribution>(state);
    j["type"] = "distribution";
    j["values"] = std::vector<double>(p.data(), p.data() + p.size());
  } else {
    const auto& rho = std::get<DensityMatrix>(state);
    j["type"] = "density";
    std::vector<std::vector<double>> re, im;
    for (Eigen::Index r = 0; r < rho.rows(); ++r) {
      std::vector<double> rr, ri;
      for (Eigen::Index c = 0; c < rho.cols(); ++c) {
        rr.push_back(rho(r, c).real());
        ri.push_back(rho(r, c).imag());
      }
      re.push_back(rr);
      im.push_back(ri);
    }
    j["re"] = re;
    j["im"] = im;
  }
  write_text_file(path, j.dump(2) + "\n");
}

StateVariant read_state_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("read_state_file: " + path + ": " + e.what());
  }
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "distribution") {
      const auto values = j.at("values").get<std::vector<double>>();
      if (values.empty()) {
        throw IoError("read_state_file: empty distribution");
      }
      PhononDistribution p(values.size());
      for (size_t i = 0; i < values.size(); ++i) p(i) = values[i];
      return p;
    }
    if (type == "density") {
      const auto re = j.at("re").get<std::vector<std::vector<double>>>();
      const auto im = j.at("im").get<std::vector<std::vector<double>>>();
      const size_t n = re.size();
      if (n == 0 || im.size() != n) {
        throw IoError("read_state_file: malformed density matrix");
      }
      DensityMatrix rho(n, n);
      for (size_t r = 0; r < n; ++r) {
        if (re[r].size() != n || im[r].size() != n) {
          throw IoError("read_state_file: density matrix not square");
        }
        for (size_t c = 0; c < n; ++c) {
          rho(r, c) = std::complex<double>(re[r][c], im[r][c]);
        }
      }
      return rho;
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("read_state_file: " + path + ": " + e.what());
  }
  throw IoError("read_state_file: unknown state type in " + path);
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("write_text_file: cannot open " + path);
  }
  out << contents;
  if (!out) {
    throw IoError("write_text_file: write failed for " + path);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("read_text_file: cannot open " + path);
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace omspec
