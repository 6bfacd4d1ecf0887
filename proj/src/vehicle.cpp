#include "phmkit/vehicle.hpp"

#include "phmkit/decision.hpp"
#include "phmkit/dmatrix.hpp"
#include "phmkit/fault_tree.hpp"
#include "phmkit/model_json.hpp"

namespace phmkit {

namespace {

const char* k_reliability_csv =
    "id,name,mtbf,mttr,repair_cost\n"
    "AI,Air System,900,5,250\n"
    "AL,Alternator,1300,15,900\n"
    "AX,Axles,1800,12,2000\n"
    "BR,Brakes,1200,5,950\n"
    "CO,Cooling System,2100,6,200\n"
    "EL,Electronics,1700,20,600\n"
    "FU,Fuel System,800,16,1200\n"
    "IG,Ignition System,600,13,300\n"
    "PR,Compression System,1100,35,9000\n"
    "PW1,Power Source 1,400,3,250\n"
    "PW2,Power Source 2,200,3,250\n"
    "SU,Suspension System,1500,8,850\n"
    "TR,Transmission,2500,30,6500\n"
    "WT,Wheels & Tires,700,3,700\n";

const char* k_dmatrix_csv =
    "fault,T_CHAS,T_DRV,T_ELEC,T_ENG,T_PWR,T_THERM\n"
    "AI,0,0,0,1,0,0\n"
    "AL,0,0,1,0,1,0\n"
    "AX,0,1,0,0,0,0\n"
    "BR,1,0,0,0,0,0\n"
    "CO,0,0,0,1,0,1\n"
    "EL,0,0,1,0,0,0\n"
    "FU,0,0,0,1,0,0\n"
    "IG,0,0,0,1,0,0\n"
    "PR,0,0,0,1,0,0\n"
    "PW1,0,0,0,0,1,0\n"
    "PW2,0,0,0,0,1,0\n"
    "SU,1,0,0,0,0,0\n"
    "TR,0,1,0,0,0,0\n"
    "WT,1,1,0,0,0,0\n";

const char* k_test_params_json = R"([
  {"id": "T_CHAS", "fa": 0.03, "nd": 0.06},
  {"id": "T_DRV", "fa": 0.02, "nd": 0.08},
  {"id": "T_ELEC", "fa": 0.01, "nd": 0.02},
  {"id": "T_ENG", "fa": 0.05, "nd": 0.10},
  {"id": "T_PWR", "fa": 0.02, "nd": 0.05},
  {"id": "T_THERM", "fa": 0.01, "nd": 0.04}
]
)";

// Which subsystems feed which hazard is an illustrative assumption; the
// terminal hazards latch (mu = 0) while intermediate ones clear once their
// causes are repaired.
const char* k_fault_tree_json = R"({
  "top": "LossOfCrew",
  "nodes": {
    "AI": {"kind": "fault"},
    "AL": {"kind": "fault"},
    "AX": {"kind": "fault"},
    "BR": {"kind": "fault"},
    "CO": {"kind": "fault"},
    "EL": {"kind": "fault"},
    "FU": {"kind": "fault"},
    "IG": {"kind": "fault"},
    "PR": {"kind": "fault"},
    "PW1": {"kind": "fault"},
    "PW2": {"kind": "fault"},
    "SU": {"kind": "fault"},
    "TR": {"kind": "fault"},
    "WT": {"kind": "fault"},
    "LossOfPower": {"kind": "gate", "gate_op": "and", "children": ["PW1", "PW2"]},
    "LossOfElectrical": {"kind": "gate", "gate_op": "or", "children": ["LossOfPower", "AL", "EL"]},
    "LossOfEngine": {"kind": "gate", "gate_op": "or", "children": ["AI", "CO", "FU", "IG", "PR"]},
    "LossOfPowerTrain": {"kind": "gate", "gate_op": "or", "children": ["AX", "TR", "WT"]},
    "LossOfChassis": {"kind": "gate", "gate_op": "or", "children": ["BR", "SU"]},
    "LossOfVehicle": {"kind": "gate", "gate_op": "or",
                      "children": ["LossOfElectrical", "LossOfEngine", "LossOfPowerTrain"]},
    "LossOfCrew": {"kind": "gate", "gate_op": "and", "children": ["LossOfVehicle", "LossOfChassis"]}
  }
}
)";

const char* k_gate_params_json = R"([
  {"id": "LossOfPower", "mode": "simplified", "lambda": 0.5, "mu": 0.25},
  {"id": "LossOfElectrical", "mode": "simplified", "lambda": 0.05, "mu": 0.25},
  {"id": "LossOfEngine", "mode": "noisy_or", "mu": 0.25,
   "noisy_rates": {"AI": 0.025, "CO": 0.02, "FU": 0.03, "IG": 0.04, "PR": 0.015}},
  {"id": "LossOfPowerTrain", "mode": "simplified", "lambda": 0.05, "mu": 0.25},
  {"id": "LossOfChassis", "mode": "simplified", "lambda": 0.05, "mu": 0.25},
  {"id": "LossOfVehicle", "mode": "simplified", "lambda": 0.1, "mu": 0},
  {"id": "LossOfCrew", "mode": "simplified", "lambda": 0.01, "mu": 0}
]
)";

const char* k_decisions_json = R"({
  "decisions": [
    {
      "id": "Operation",
      "states": ["standard", "conservative"],
      "overrides": [
        {"child": "CO", "per_state": {"conservative": {"scale_lambda": 0.5}}}
      ]
    },
    {
      "id": "D_AX",
      "states": ["current", "upgraded"],
      "overrides": [
        {"child": "AX", "per_state": {"upgraded": {
          "parents": [],
          "matrices": {"": ["-0.000476190476190", "0.000476190476190", "0.05", "-0.05"]}
        }}}
      ]
    },
    {
      "id": "D_PW",
      "states": ["redundant", "single"],
      "overrides": [
        {"child": "LossOfPower", "per_state": {"single": {
          "parents": ["PW1"],
          "matrices": {
            "PW1=0": ["0", "0", "0.25", "-0.25"],
            "PW1=1": ["-0.5", "0.5", "0", "0"]
          }
        }}}
      ],
      "edge_masks": [
        {"state": "single", "parent": "PW2", "child": "LossOfPower"}
      ]
    }
  ]
}
)";

const char* k_performance_json = R"([
  {
    "id": "op_value",
    "clauses": [
      {"if": [{"var": "LossOfVehicle", "state": "0"},
              {"var": "Operation", "state": "standard"}], "rate": 10},
      {"if": [{"var": "LossOfVehicle", "state": "0"},
              {"var": "Operation", "state": "conservative"}], "rate": 5}
    ]
  },
  {
    "id": "repair_cost",
    "impulses": [
      {"enter": {"var": "AI", "state": "0"}, "value": 250},
      {"enter": {"var": "AL", "state": "0"}, "value": 900},
      {"enter": {"var": "AX", "state": "0"}, "value": 2000,
       "if": [{"var": "D_AX", "state": "current"}]},
      {"enter": {"var": "AX", "state": "0"}, "value": 2500,
       "if": [{"var": "D_AX", "state": "upgraded"}]},
      {"enter": {"var": "BR", "state": "0"}, "value": 950},
      {"enter": {"var": "CO", "state": "0"}, "value": 200},
      {"enter": {"var": "EL", "state": "0"}, "value": 600},
      {"enter": {"var": "FU", "state": "0"}, "value": 1200},
      {"enter": {"var": "IG", "state": "0"}, "value": 300},
      {"enter": {"var": "PR", "state": "0"}, "value": 9000},
      {"enter": {"var": "PW1", "state": "0"}, "value": 250},
      {"enter": {"var": "PW2", "state": "0"}, "value": 250},
      {"enter": {"var": "SU", "state": "0"}, "value": 850},
      {"enter": {"var": "TR", "state": "0"}, "value": 6500},
      {"enter": {"var": "WT", "state": "0"}, "value": 700}
    ]
  },
  {
    "id": "elec_uptime",
    "clauses": [
      {"if": [{"var": "LossOfElectrical", "state": "0"}], "rate": 1}
    ]
  }
]
)";

const char* k_objectives_json = R"([
  {"id": "op_value", "pf": "op_value", "direction": "maximize", "threshold": 1000},
  {"id": "repair_cost", "pf": "repair_cost", "direction": "minimize"},
  {"id": "elec_uptime", "pf": "elec_uptime", "direction": "maximize"}
]
)";

const char* k_evidence_json = R"({
  "point": [
    {"var": "T_PWR", "state": "0", "t": 50}
  ],
  "interval": [
    {"var": "T_ENG", "state": "1", "t_start": 100, "t_end": 102}
  ]
}
)";

const char* k_bundle_readme =
    "# Vehicle example\n"
    "\n"
    "A 14-subsystem ground vehicle with six built-in tests, seven hazards and\n"
    "three decisions. Parameters live in the CSV/JSON files; all times are in\n"
    "hours and all rates per hour.\n"
    "\n"
    "Files:\n"
    "- `dmatrix.csv` - which test monitors which subsystem\n"
    "- `reliability.csv` - MTBF / MTTR / repair cost per subsystem\n"
    "- `test_params.json` - per-test false-alarm and non-detect probabilities\n"
    "- `fault_tree.json`, `gate_params.json` - hazard propagation\n"
    "- `decisions.json` - operating mode, axle design, power redundancy\n"
    "- `performance.json`, `objectives.json` - scenario scoring\n"
    "- `evidence.json` - a small example observation set\n"
    "\n"
    "The tree wiring (which subsystem feeds which hazard) is an illustrative\n"
    "assumption: edit `fault_tree.json` to match a real system. The terminal\n"
    "hazards (LossOfVehicle, LossOfCrew) latch once entered; intermediate\n"
    "hazards clear at their gate mu once the causing subsystems are repaired.\n"
    "\n"
    "Typical pipeline:\n"
    "\n"
    "    phmkit derive dmatrix --dmatrix dmatrix.csv --reliability reliability.csv \\\n"
    "        --tests test_params.json -o diag.json\n"
    "    phmkit derive faulttree --tree fault_tree.json --reliability reliability.csv \\\n"
    "        --gates gate_params.json -o haz.json\n"
    "    phmkit merge --diagnostic diag.json --hazard haz.json \\\n"
    "        --decisions decisions.json -o vehicle.json\n"
    "    phmkit query --model vehicle.json --type state_prob --var LossOfVehicle \\\n"
    "        --state 1 --t 500 --engine exact\n"
    "    phmkit evaluate --model vehicle.json --pfs performance.json \\\n"
    "        --objectives objectives.json --horizon 500 --seed 42 --risk-var LossOfVehicle\n";

}  // namespace

std::map<std::string, std::string> vehicle_example_files() {
    return {
        {"reliability.csv", k_reliability_csv},
        {"dmatrix.csv", k_dmatrix_csv},
        {"test_params.json", k_test_params_json},
        {"fault_tree.json", k_fault_tree_json},
        {"gate_params.json", k_gate_params_json},
        {"decisions.json", k_decisions_json},
        {"performance.json", k_performance_json},
        {"objectives.json", k_objectives_json},
        {"evidence.json", k_evidence_json},
        {"README.md", k_bundle_readme},
    };
}

CtbnModel build_vehicle_model() {
    const auto files = vehicle_example_files();
    const auto dmatrix = parse_dmatrix(files.at("dmatrix.csv"));
    const auto reliability = parse_reliability_csv(files.at("reliability.csv"));
    const auto tests = parse_test_params_json(files.at("test_params.json"));
    const auto diagnostic = build_diagnostic_model(dmatrix, reliability, tests,
                                                   TestCimMode::simplified);

    const auto tree = parse_fault_tree(files.at("fault_tree.json"));
    const auto gates = parse_gate_params(files.at("gate_params.json"));
    const auto hazard = build_hazard_model(prune_fault_tree(tree), reliability, gates);

    CtbnModel model = merge_models(diagnostic, hazard);
    for (const auto& spec : decision_specs_from_string(files.at("decisions.json")))
        model = attach_decision(model, spec);
    return model;
}

}  // namespace phmkit
