#include "odt/dataset.hpp"

#include "odt/csv.hpp"
#include "odt/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace odt {

namespace {

const std::vector<std::string>& formulation_header() {
    static const std::vector<std::string> header = [] {
        std::vector<std::string> h{"api_name", "api_dose_mg"};
        for (const auto& slot : kSlots) {
            h.push_back(std::string(slot.column) + "_name");
            h.push_back(std::string(slot.column) + "_mg");
        }
        h.insert(h.end(), {"hardness_n", "friability_pct", "thickness_mm", "punch_mm",
                           "disintegration_time_sec"});
        return h;
    }();
    return header;
}

const std::vector<std::string>& api_header() {
    static const std::vector<std::string> header = {
        "api_name",       "molecular_weight", "xlogp3",     "hbond_donors",
        "hbond_acceptors", "rotatable_bonds",  "tpsa",       "heavy_atoms",
        "complexity",      "logs"};
    return header;
}

std::string cell_ref(std::size_t data_row, const std::string& column) {
    // data_row is 0-based over data rows; report 1-based file rows incl. header
    return "row " + std::to_string(data_row + 2) + ", column " + column;
}

int parse_count(std::string_view field, const std::string& where) {
    const double v = csv::parse_double(field, where);
    const int n = static_cast<int>(v);
    if (v < 0 || static_cast<double>(n) != v) {
        throw ParseError("expected a non-negative integer at " + where + ", got '" +
                         std::string(field) + "'");
    }
    return n;
}

std::map<std::string, ApiDescriptor> parse_api_table(std::string_view api_csv) {
    const auto lines = csv::split_lines(api_csv);
    if (lines.empty()) throw ParseError("API descriptor file is empty");
    if (csv::split_line(lines[0]) != api_header()) {
        throw ParseError("API descriptor file header does not match the apis.csv schema");
    }

    std::map<std::string, ApiDescriptor> table;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = csv::split_line(lines[i]);
        if (fields.size() != api_header().size()) {
            throw ParseError("API descriptor row " + std::to_string(i + 1) + " has " +
                             std::to_string(fields.size()) + " columns, expected " +
                             std::to_string(api_header().size()));
        }
        ApiDescriptor d;
        d.name = fields[0];
        const std::string where = "API row " + std::to_string(i + 1);
        d.molecular_weight = csv::parse_double(fields[1], where + ", molecular_weight");
        d.xlogp3 = csv::parse_double(fields[2], where + ", xlogp3");
        d.hbond_donors = parse_count(fields[3], where + ", hbond_donors");
        d.hbond_acceptors = parse_count(fields[4], where + ", hbond_acceptors");
        d.rotatable_bonds = parse_count(fields[5], where + ", rotatable_bonds");
        d.tpsa = csv::parse_double(fields[6], where + ", tpsa");
        d.heavy_atoms = parse_count(fields[7], where + ", heavy_atoms");
        d.complexity = csv::parse_double(fields[8], where + ", complexity");
        d.logs = csv::parse_double(fields[9], where + ", logs");

        if (d.name.empty()) throw ParseError(where + ": empty API name");
        if (d.molecular_weight <= 0) {
            throw ValidationError(where + ": molecular weight must be positive");
        }
        if (!table.emplace(d.name, d).second) {
            throw ValidationError("duplicate API descriptor for '" + d.name + "'");
        }
    }
    return table;
}

void append_vocab(std::array<std::vector<std::string>, kCategoryCount>& vocab,
                  ExcipientCategory category, const std::string& name) {
    auto& names = vocab[static_cast<std::size_t>(category)];
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace

const ApiDescriptor& Corpus::api(const std::string& name) const {
    const auto it = api_table.find(name);
    if (it == api_table.end()) {
        throw ValidationError("unknown API '" + name + "' (not in the descriptor table)");
    }
    return it->second;
}

Corpus parse_corpus(std::string_view formulation_csv, std::string_view api_csv) {
    Corpus corpus;
    corpus.api_table = parse_api_table(api_csv);

    const auto lines = csv::split_lines(formulation_csv);
    if (lines.empty()) throw ParseError("formulation file is empty");
    if (csv::split_line(lines[0]) != formulation_header()) {
        throw ParseError("formulation file header does not match the formulations.csv schema");
    }

    const std::size_t expected = formulation_header().size();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = csv::split_line(lines[i]);
        const std::size_t data_row = i - 1;
        if (fields.size() != expected) {
            throw ParseError("row " + std::to_string(i + 1) + " has " +
                             std::to_string(fields.size()) + " columns, expected " +
                             std::to_string(expected));
        }

        FormulationRecord rec;
        rec.api_name = fields[0];
        if (rec.api_name.empty()) {
            throw ParseError(cell_ref(data_row, "api_name") + ": empty API name");
        }
        if (!corpus.api_table.contains(rec.api_name)) {
            throw ValidationError("row " + std::to_string(i + 1) + ": unknown API '" +
                                  rec.api_name + "'");
        }
        rec.api_dose_mg = csv::parse_double(fields[1], cell_ref(data_row, "api_dose_mg"));
        if (rec.api_dose_mg <= 0) {
            throw ValidationError(cell_ref(data_row, "api_dose_mg") +
                                  ": API dose must be positive");
        }

        for (std::size_t s = 0; s < kSlotCount; ++s) {
            const std::string& name = fields[2 + 2 * s];
            const std::string& dose = fields[3 + 2 * s];
            auto& entry = rec.excipients[s];
            entry.category = kSlots[s].category;
            if (name.empty()) {
                // a bare dose with no excipient name is not interpretable
                if (!dose.empty() &&
                    csv::parse_double(dose, cell_ref(data_row, std::string(kSlots[s].column) +
                                                                   "_mg")) != 0.0) {
                    throw ParseError(cell_ref(data_row, std::string(kSlots[s].column) + "_mg") +
                                     ": dose given without an excipient name");
                }
                continue;
            }
            entry.name = name;
            entry.dose_mg =
                dose.empty() ? 0.0
                             : csv::parse_double(dose, cell_ref(data_row,
                                                                std::string(kSlots[s].column) +
                                                                    "_mg"));
            if (entry.dose_mg < 0) {
                throw ValidationError(cell_ref(data_row, std::string(kSlots[s].column) + "_mg") +
                                      ": negative dose");
            }
            append_vocab(corpus.excipient_vocab, entry.category, entry.name);
        }

        const std::size_t m = 2 + 2 * kSlotCount;
        rec.hardness_n = csv::parse_optional_double(fields[m], cell_ref(data_row, "hardness_n"));
        rec.friability_pct =
            csv::parse_optional_double(fields[m + 1], cell_ref(data_row, "friability_pct"));
        rec.thickness_mm =
            csv::parse_optional_double(fields[m + 2], cell_ref(data_row, "thickness_mm"));
        rec.punch_mm = csv::parse_optional_double(fields[m + 3], cell_ref(data_row, "punch_mm"));
        rec.disintegration_time_sec = csv::parse_optional_double(
            fields[m + 4], cell_ref(data_row, "disintegration_time_sec"));
        if (rec.disintegration_time_sec && *rec.disintegration_time_sec < 0) {
            throw ValidationError(cell_ref(data_row, "disintegration_time_sec") +
                                  ": negative disintegration time");
        }

        corpus.records.push_back(std::move(rec));
    }
    return corpus;
}

std::string serialize_corpus(const Corpus& corpus) {
    std::string out = csv::join(formulation_header()) + "\n";
    auto opt = [](const std::optional<double>& v) {
        return v ? csv::format_double(*v) : std::string();
    };
    for (const auto& rec : corpus.records) {
        std::vector<std::string> fields{rec.api_name, csv::format_double(rec.api_dose_mg)};
        for (const auto& entry : rec.excipients) {
            if (entry.present()) {
                fields.push_back(entry.name);
                fields.push_back(csv::format_double(entry.dose_mg));
            } else {
                fields.emplace_back();
                fields.emplace_back();
            }
        }
        fields.push_back(opt(rec.hardness_n));
        fields.push_back(opt(rec.friability_pct));
        fields.push_back(opt(rec.thickness_mm));
        fields.push_back(opt(rec.punch_mm));
        fields.push_back(opt(rec.disintegration_time_sec));
        out += csv::join(fields) + "\n";
    }
    return out;
}

std::string serialize_api_table(const Corpus& corpus) {
    std::string out = csv::join(api_header()) + "\n";
    for (const auto& [name, d] : corpus.api_table) {
        std::vector<std::string> fields{
            name,
            csv::format_double(d.molecular_weight),
            csv::format_double(d.xlogp3),
            std::to_string(d.hbond_donors),
            std::to_string(d.hbond_acceptors),
            std::to_string(d.rotatable_bonds),
            csv::format_double(d.tpsa),
            std::to_string(d.heavy_atoms),
            csv::format_double(d.complexity),
            csv::format_double(d.logs)};
        out += csv::join(fields) + "\n";
    }
    return out;
}

std::vector<Eigen::Index> labeled_records(const Corpus& corpus) {
    std::vector<Eigen::Index> indices;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        if (corpus.records[i].labeled()) indices.push_back(static_cast<Eigen::Index>(i));
    }
    return indices;
}

std::map<std::string, std::vector<Eigen::Index>> api_groups(const Corpus& corpus) {
    std::map<std::string, std::vector<Eigen::Index>> groups;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        groups[corpus.records[i].api_name].push_back(static_cast<Eigen::Index>(i));
    }
    return groups;
}

std::map<std::string, std::vector<Eigen::Index>> api_row_groups(const Corpus& corpus) {
    std::map<std::string, std::vector<Eigen::Index>> groups;
    Eigen::Index row = 0;
    for (const auto& rec : corpus.records) {
        if (rec.labeled()) groups[rec.api_name].push_back(row++);
    }
    return groups;
}

std::vector<std::string> audit_doses(const Corpus& corpus) {
    // within-API median of all nonzero doses (API dose + excipient doses)
    std::map<std::string, std::vector<double>> doses;
    for (const auto& rec : corpus.records) {
        auto& v = doses[rec.api_name];
        if (rec.api_dose_mg > 0) v.push_back(rec.api_dose_mg);
        for (const auto& e : rec.excipients) {
            if (e.present() && e.dose_mg > 0) v.push_back(e.dose_mg);
        }
    }
    std::map<std::string, double> medians;
    for (const auto& [api, v] : doses) {
        if (!v.empty()) medians[api] = median(v);
    }

    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        const auto& rec = corpus.records[i];
        const auto it = medians.find(rec.api_name);
        if (it == medians.end()) continue;
        const double cutoff = 10.0 * it->second;
        auto warn = [&](const std::string& what, double dose) {
            std::ostringstream os;
            os << "record " << i << " (" << rec.api_name << "): " << what << " dose " << dose
               << " mg exceeds 10x the within-API median (" << it->second << " mg)";
            warnings.push_back(os.str());
        };
        if (rec.api_dose_mg > cutoff) warn("API", rec.api_dose_mg);
        for (const auto& e : rec.excipients) {
            if (e.present() && e.dose_mg > cutoff) warn(e.name, e.dose_mg);
        }
    }
    return warnings;
}

Corpus load_corpus(const std::string& formulations_path, const std::string& apis_path) {
    auto read_file = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cannot open '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    return parse_corpus(read_file(formulations_path), read_file(apis_path));
}

} // namespace odt
