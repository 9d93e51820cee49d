#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "gwrecon/job.hpp"
#include "gwrecon/selftest.hpp"

namespace
{

enum exit_code { ok = 0, validation = 2, computation = 3 };

int run_job(const std::string &job_path, const std::string &out_override, const std::string &format_override)
{
    std::ifstream in(job_path);
    if (!in)
        throw gwr::validation_error("cannot read job file '" + job_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    auto spec = gwr::job::parse_job(buf.str());
    if (!out_override.empty())
        spec.output_path = out_override;
    if (!format_override.empty())
        spec.format = format_override;
    auto result = gwr::job::run(spec);
    const std::string text = gwr::job::render(result, spec.format);
    if (spec.output_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(spec.output_path, std::ios::binary);
        if (!out)
            throw gwr::validation_error("cannot write output file '" + spec.output_path + "'");
        out << text;
    }
    std::cerr << gwr::job::summary(spec, result) << "\n";
    return ok;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"gwrecon: genus-zero Gromov-Witten reconstruction from cone points"};
    std::string job_path, out_path, format;
    int threads = 1;
    bool selftest = false;
    app.add_option("--job", job_path, "job file (JSON)");
    app.add_option("--out", out_path, "output path; overrides the job file, stdout if neither is set");
    app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--selftest", selftest, "run the acceptance suite");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return validation;
    }

    (void)threads;
    if (selftest) {
        auto report = gwr::selftest::run_all();
        gwr::selftest::print(std::cout, report);
        return gwr::selftest::all_pass(report) ? ok : computation;
    }
    if (job_path.empty()) {
        std::cerr << "error: --job or --selftest is required\n";
        return validation;
    }
    try {
        return run_job(job_path, out_path, format);
    } catch (const gwr::validation_error &e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return validation;
    } catch (const gwr::mismatch_error &e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return validation;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return validation;
    } catch (const gwr::computation_error &e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return computation;
    } catch (const std::exception &e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return computation;
    }
}
