#pragma once

#include <json.hpp>

#include "gasflow/domains.hpp"
#include "gasflow/operator.hpp"
#include "gasflow/visolve.hpp"
#include "gasflow/wsearch.hpp"

// JSON views of the solver types. Non-finite gamma values (the tree-exact
// certificate) serialize as null.

namespace gasflow {

nlohmann::json to_json(const GasState& z);
GasState gas_state_from_json(const nlohmann::json& j);
GasState load_state_file(const std::string& path);

nlohmann::json to_json(const LmiWitness& w);
nlohmann::json to_json(const DomainCertificate& cert);
nlohmann::json to_json(const DomainSpec& spec);

// Report of a solve run: status, state, residuals, iteration counts.
nlohmann::json solve_report(const Certification& cert, const VIResult& vi);

}  // namespace gasflow
