#pragma once

#include <Eigen/Core>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace odt {

/// Molecular descriptors of one active pharmaceutical ingredient, keyed by name.
struct ApiDescriptor {
    std::string name;
    double molecular_weight = 0.0;
    double xlogp3 = 0.0;
    int hbond_donors = 0;
    int hbond_acceptors = 0;
    int rotatable_bonds = 0;
    double tpsa = 0.0;
    int heavy_atoms = 0;
    double complexity = 0.0;
    double logs = 0.0;

    bool operator==(const ApiDescriptor&) const = default;
};

enum class ExcipientCategory { Filler, Binder, Disintegrant, Lubricant, Solubilizer };

inline constexpr std::size_t kCategoryCount = 5;

inline constexpr std::string_view category_name(ExcipientCategory c) {
    switch (c) {
        case ExcipientCategory::Filler: return "filler";
        case ExcipientCategory::Binder: return "binder";
        case ExcipientCategory::Disintegrant: return "disintegrant";
        case ExcipientCategory::Lubricant: return "lubricant";
        case ExcipientCategory::Solubilizer: return "solubilizer";
    }
    return "?";
}

/// One excipient slot of a formulation. An empty name means the slot is
/// unused; dose 0 with a name means the excipient is coded but absent from
/// this particular formulation.
struct ExcipientEntry {
    ExcipientCategory category = ExcipientCategory::Filler;
    std::string name;
    double dose_mg = 0.0;

    bool present() const { return !name.empty(); }
    bool operator==(const ExcipientEntry&) const = default;
};

// Fixed slot layout of the corpus table: 2 fillers, 1 binder, 2 disintegrants,
// 2 lubricants, 1 solubilizer.
inline constexpr std::size_t kSlotCount = 8;

struct SlotSpec {
    ExcipientCategory category;
    const char* column; // CSV column prefix, e.g. "filler1"
};

inline constexpr std::array<SlotSpec, kSlotCount> kSlots = {{
    {ExcipientCategory::Filler, "filler1"},
    {ExcipientCategory::Filler, "filler2"},
    {ExcipientCategory::Binder, "binder"},
    {ExcipientCategory::Disintegrant, "disint1"},
    {ExcipientCategory::Disintegrant, "disint2"},
    {ExcipientCategory::Lubricant, "lubricant1"},
    {ExcipientCategory::Lubricant, "lubricant2"},
    {ExcipientCategory::Solubilizer, "solubilizer"},
}};

/// One corpus row: API + dose, slotted excipients, optional manufacture
/// parameters, optional disintegration-time label.
struct FormulationRecord {
    std::string api_name;
    double api_dose_mg = 0.0;
    std::array<ExcipientEntry, kSlotCount> excipients{};
    std::optional<double> hardness_n;
    std::optional<double> friability_pct;
    std::optional<double> thickness_mm;
    std::optional<double> punch_mm;
    std::optional<double> disintegration_time_sec;

    bool labeled() const { return disintegration_time_sec.has_value(); }
    bool operator==(const FormulationRecord&) const = default;
};

/// Immutable after parsing; record order matches input file order and indices
/// are meaningful downstream.
struct Corpus {
    std::vector<FormulationRecord> records;
    std::map<std::string, ApiDescriptor> api_table;
    // Per category, names in order of first appearance in the records.
    std::array<std::vector<std::string>, kCategoryCount> excipient_vocab;

    const ApiDescriptor& api(const std::string& name) const;
    bool operator==(const Corpus&) const = default;
};

/// Parses the formulations CSV plus the API descriptor CSV into a Corpus.
/// Blank dose cells read as 0 mg; blank manufacture/label cells read as
/// absent. Throws ParseError (malformed row, naming row and column) or
/// ValidationError (API name missing from the descriptor table).
Corpus parse_corpus(std::string_view formulation_csv, std::string_view api_csv);

/// Inverse of parse_corpus for the formulations side: parse(serialize(c)) == c.
std::string serialize_corpus(const Corpus& corpus);
std::string serialize_api_table(const Corpus& corpus);

/// Indices of records carrying a disintegration-time label, in record order.
std::vector<Eigen::Index> labeled_records(const Corpus& corpus);

/// Partition of all record indices by API name.
std::map<std::string, std::vector<Eigen::Index>> api_groups(const Corpus& corpus);

/// Same partition restricted to labeled records and re-expressed in
/// labeled-row space (positions within labeled_records).
std::map<std::string, std::vector<Eigen::Index>> api_row_groups(const Corpus& corpus);

/// Strict-mode audit: flags doses larger than 10x the within-API median of
/// nonzero doses. Returns human-readable warnings; never modifies data.
std::vector<std::string> audit_doses(const Corpus& corpus);

Corpus load_corpus(const std::string& formulations_path, const std::string& apis_path);

} // namespace odt
