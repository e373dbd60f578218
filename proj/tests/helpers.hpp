#pragma once

#include "odt/dataset.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

inline const char* kFormulationHeader =
    "api_name,api_dose_mg,filler1_name,filler1_mg,filler2_name,filler2_mg,binder_name,"
    "binder_mg,disint1_name,disint1_mg,disint2_name,disint2_mg,lubricant1_name,lubricant1_mg,"
    "lubricant2_name,lubricant2_mg,solubilizer_name,solubilizer_mg,hardness_n,friability_pct,"
    "thickness_mm,punch_mm,disintegration_time_sec";

inline const char* kApiHeader =
    "api_name,molecular_weight,xlogp3,hbond_donors,hbond_acceptors,rotatable_bonds,tpsa,"
    "heavy_atoms,complexity,logs";

inline std::string formulations_csv(const std::vector<std::string>& rows) {
    std::string out = std::string(kFormulationHeader) + "\n";
    for (const auto& r : rows) out += r + "\n";
    return out;
}

inline std::string apis_csv(const std::vector<std::string>& rows) {
    std::string out = std::string(kApiHeader) + "\n";
    for (const auto& r : rows) out += r + "\n";
    return out;
}

// two stand-in APIs for constructed corpora
inline std::string tiny_apis() {
    return apis_csv({"A,100,1.5,1,2,3,40,10,200,-2", "B,250,3.1,0,4,5,80,18,450,-4"});
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline odt::Corpus bundled_corpus() {
    static const odt::Corpus corpus = odt::load_corpus(
        std::string(ODT_DATA_DIR) + "/odt_table1.csv", std::string(ODT_DATA_DIR) + "/odt_apis.csv");
    return corpus;
}

} // namespace testutil
