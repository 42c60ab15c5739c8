#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cutstack/adversary.hpp"
#include "cutstack/column.hpp"
#include "cutstack/dyadic.hpp"
#include "cutstack/estimator.hpp"
#include "cutstack/process.hpp"
#include "cutstack/slowrate.hpp"
#include "cutstack/stats.hpp"

namespace cutstack {

using Json = nlohmann::json;

Json to_json(const Dyadic& d);
Dyadic dyadic_from_json(const Json& j);

Json to_json(const DyadicInterval& iv);
DyadicInterval interval_from_json(const Json& j);

// {"base":{"lo":..,"hi":..}} | {"double":{"c":..,"n":..}} | {"stack":[..]}
Json to_json(const Column& c);
Column column_from_json(const Json& j);

Json to_json(const Enclosure& e);
Json to_json(const SlowRateCertificate& c);
Json to_json(const Budgets& b);
Budgets budgets_from_json(const Json& j);
Json to_json(const StageTrace& t);
StageTrace trace_from_json(const Json& j);
Json to_json(const FalsificationWitness& w);
FalsificationWitness witness_from_json(const Json& j);
Json to_json(const OrbitSample& s);
Json to_json(const StarReport& r);
Json to_json(const EntropyReport& r);

// Built-in estimators by name:
//   {"type":"constant","value":"1/2"}
//   {"type":"empirical","growth":"k^2*2^|x|"}
//   {"type":"oracle","k":[1,2,4],"stages":8}
//   {"type":"subprocess","argv":["./est","--flag"]}
EstimatorPtr estimator_from_json(const Json& j);

// "k=16,m=4096,steps=1e6,cap=16384" (any subset; stages set separately).
Budgets parse_budgets(const std::string& text, Budgets base = {});

// Processes persist as construction specs, rebuilt deterministically.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::theorem2;
  std::size_t stages = 0;
  std::vector<std::uint64_t> k;  // theorem2: k_0..k_stages
  std::optional<std::string> rate;  // theorem2 built by choose_k_for_rate
  Json estimators = Json::array();  // adversary
  Budgets budgets;                  // adversary
};

Json to_json(const ProcessSpec& s);
ProcessSpec spec_from_json(const Json& j);

struct LoadedProcess {
  ProcessSpec spec;
  std::shared_ptr<const Process> process;
  std::optional<AdversaryRun> adversary;
};

LoadedProcess build_from_spec(const ProcessSpec& spec);

// Spec plus derived records (k sequence, trace, witnesses) for files.
Json process_document(const LoadedProcess& lp);

}  // namespace cutstack
