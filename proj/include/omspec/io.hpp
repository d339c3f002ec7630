#ifndef OMSPEC_IO_HPP
#define OMSPEC_IO_HPP

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "omspec/params.hpp"
#include "omspec/states.hpp"

namespace omspec {

/// Columnar spectrum file:
///   # omspec-spectrum v1
///   # key = value            (metadata; written keys are sorted, plus a
///   #  ...                    timestamp line)
///   # columns = detuning value [sigma]
///   <Delta_k/omega_M>  <S*omega_M>  [sigma*omega_M]
/// Detunings on disk are strictly increasing; readers accept shuffled rows
/// and sort, but reject duplicate detunings and negative values.
struct SpectrumFile {
  Spectrum spectrum;
  std::map<std::string, std::string> metadata;
};

void write_spectrum_file(const std::string& path, const Spectrum& spectrum,
                         const std::map<std::string, std::string>& metadata);

SpectrumFile read_spectrum_file(const std::string& path);

/// JSON state file: {"type": "distribution", "values": [...]} or
/// {"type": "density", "re": [[...]], "im": [[...]]}.
using StateVariant = std::variant<PhononDistribution, DensityMatrix>;

void write_state_file(const std::string& path, const StateVariant& state);
StateVariant read_state_file(const std::string& path);

/// JSON result files for the CLI; free-form payload assembled by callers.
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

/// RFC 3339 UTC timestamp for provenance headers.
std::string current_timestamp();

}  // namespace omspec

#endif
