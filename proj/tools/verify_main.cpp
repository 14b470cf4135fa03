#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <parapsi/parapsi.hpp>

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"numerical estimate workbench"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    static const std::vector<std::string> kScenarios = {
        "apriori", "t_scaling", "kernel_decay", "hormander",
        "weights_audit", "maximal_audit", "solve"};
    for (const auto& name : kScenarios) {
        CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' scenario");
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory for report.json/report.csv");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string scenario = app.get_subcommands().front()->get_name();

    try {
        std::ifstream in(config_path);
        if (!in) throw parapsi::input_error("cannot open config: " + config_path);
        parapsi::json cfg = parapsi::json::parse(in);

        const auto t0 = std::chrono::steady_clock::now();
        parapsi::ScenarioResult result = parapsi::run_scenario(scenario, cfg);
        result.report.runtime_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        fs::create_directories(out_dir);
        parapsi::write_csv(result.report, (fs::path(out_dir) / "report.csv").string());
        parapsi::write_json(result.report, (fs::path(out_dir) / "report.json").string());

        int fails = 0;
        for (const auto& row : result.report.rows) {
            std::cout << row.case_id << " [" << row.verdict << "] " << row.inputs << "\n";
            if (row.verdict == "fail" || row.verdict == "refused") ++fails;
        }
        std::cout << scenario << ": " << result.report.rows.size() << " rows, " << fails
                  << " failing, " << (result.report.all_pass() ? "PASS" : "FAIL") << "\n";
        return result.report.all_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
