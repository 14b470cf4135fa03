#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <parapsi/parapsi.hpp>

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"Cauchy problem driver"};

    std::string config_path, out_dir = ".", dump_path;
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory for report.json/report.csv");
    app.add_option("--dump-field", dump_path, "write the solution field to this binary file");

    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path);
        if (!in) throw parapsi::input_error("cannot open config: " + config_path);
        parapsi::json cfg = parapsi::json::parse(in);

        const auto t0 = std::chrono::steady_clock::now();
        parapsi::ScenarioResult result = parapsi::run_solve(cfg);
        result.report.runtime_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        fs::create_directories(out_dir);
        parapsi::write_csv(result.report, (fs::path(out_dir) / "report.csv").string());
        parapsi::write_json(result.report, (fs::path(out_dir) / "report.json").string());
        if (!dump_path.empty() && result.has_field)
            parapsi::write_field_binary(dump_path, result.field);

        for (const auto& row : result.report.rows)
            std::cout << row.case_id << " [" << row.verdict << "] measured="
                      << parapsi::detail::fmt_double(row.measured) << "\n";
        std::cout << (result.report.all_pass() ? "PASS" : "FAIL") << "\n";
        return result.report.all_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
