// End-to-end checks of the pseudoshrink command line. Takes the binary path
// as argv[1] (wired up by CMake) and exercises each subcommand through a
// shell, checking exit codes and parsing the printed results.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "pseudoshrink/csv.hpp"
#include "pseudoshrink/data_gen.hpp"

namespace {

int g_failures = 0;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& cmd) {
    RunResult r;
    FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::size_t got = fread(buf.data(), 1, buf.size(), pipe)) {
        r.out.append(buf.data(), got);
        if (got < buf.size()) break;
    }
    const int status = pclose(pipe);
    r.exit_code = WEXITSTATUS(status);
    return r;
}

void check(bool ok, const std::string& what) {
    if (!ok) {
        std::cerr << "FAIL: " << what << "\n";
        ++g_failures;
    }
}

double parse_kv(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + "=");
    if (pos == std::string::npos) return std::nan("");
    return std::stod(text.substr(pos + key.size() + 1));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_checks <pseudoshrink binary>\n";
        return 2;
    }
    const std::string bin = argv[1];

    // limits: the identity closed form for tr((S^+)^2 Theta)/tr(Theta)
    {
        auto r = run(bin + " limits --spectrum identity --p 100 --cn 2 --family mp --m 2 --theta trace");
        check(r.exit_code == 0, "limits exit code");
        check(std::abs(std::stod(r.out) - 1.0) < 1e-12, "limits value 1.0");
    }
    // limits from a spectrum file
    {
        std::ofstream spec("/tmp/ps_cli_spectrum.txt");
        for (int i = 0; i < 2; ++i) spec << "1.0\n";
        for (int i = 0; i < 4; ++i) spec << "3.0\n";
        for (int i = 0; i < 4; ++i) spec << "10.0\n";
        spec.close();
        auto r = run(bin + " limits --spectrum /tmp/ps_cli_spectrum.txt --cn 2 --family mp --m 1 --theta trace");
        check(r.exit_code == 0, "limits file exit code");
        // s_1 = -v'(0) d_1(I/p) with v(0) ~ 0.2534 for this spectrum
        check(std::stod(r.out) > 0.0, "limits file value positive");
    }
    // unknown subcommand -> usage error 2
    {
        auto r = run(bin + " bogus");
        check(r.exit_code == 2, "unknown subcommand exits 2");
    }
    // missing required option -> 2
    {
        auto r = run(bin + " limits --family mp --m 2");
        check(r.exit_code == 2, "missing --cn exits 2");
    }
    // regime violation -> computation error 1
    {
        auto r = run(bin + " limits --cn 0.5 --family mp --m 2");
        check(r.exit_code == 1, "mp at c < 1 exits 1");
    }

    // build a small dataset file (p = 40, n = 20, columns are observations)
    const std::string data_path = "/tmp/ps_cli_data.csv";
    {
        using namespace pseudoshrink;
        SpectralModel model(paper_spectrum(40), sample_haar_basis(40, 1));
        auto y = generate_observations(model, 20, Dist::Normal, Eigen::VectorXd::Zero(40), 9);
        write_matrix_csv(y.entries, data_path);
    }

    // estimate report
    {
        auto r = run(bin + " estimate --data " + data_path + " --n-is-columns --t 1.0");
        check(r.exit_code == 0, "estimate exit code");
        check(std::abs(parse_kv(r.out, "p") - 40.0) < 1e-12, "estimate p");
        check(std::abs(parse_kv(r.out, "cn") - 2.0) < 1e-12, "estimate cn");
        check(std::isfinite(parse_kv(r.out, "v0")), "estimate v0 present");
        check(std::isfinite(parse_kv(r.out, "d1_t_I")), "estimate ridge block present");
    }

    // shrink-precision with the mp method
    {
        auto r = run(bin + " shrink-precision --data " + data_path +
                     " --n-is-columns --method mp --target identity --out /tmp/ps_cli_prec.csv");
        check(r.exit_code == 0, "shrink-precision exit code");
        check(std::isfinite(parse_kv(r.out, "alpha")), "shrink-precision alpha");
        check(std::isfinite(parse_kv(r.out, "beta")), "shrink-precision beta");
        const auto est = pseudoshrink::read_matrix_csv("/tmp/ps_cli_prec.csv");
        check(est.rows() == 40 && est.cols() == 40, "estimate matrix shape");
        check((est - est.transpose()).cwiseAbs().maxCoeff() < 1e-10, "estimate symmetric");
    }
    // ridge with a fixed tuning parameter
    {
        auto r = run(bin + " shrink-precision --data " + data_path +
                     " --n-is-columns --method ridge --target identity --t 1.5");
        check(r.exit_code == 0, "shrink-precision ridge exit code");
        check(std::abs(parse_kv(r.out, "t_star") - 1.5) < 1e-12, "ridge t_star echoes --t");
    }

    // shrink-gmv
    {
        auto r = run(bin + " shrink-gmv --data " + data_path +
                     " --n-is-columns --method mp --target equal --out /tmp/ps_cli_w.csv");
        check(r.exit_code == 0, "shrink-gmv exit code");
        const auto w = pseudoshrink::read_matrix_csv("/tmp/ps_cli_w.csv");
        check(w.rows() == 40 && w.cols() == 1, "weights shape");
        check(std::abs(w.sum() - 1.0) < 1e-10, "weights sum to one");
    }
    {
        auto r = run(bin + " shrink-gmv --data " + data_path + " --n-is-columns --method reflexive");
        check(r.exit_code == 0, "shrink-gmv reflexive exit code");
        check(std::isfinite(parse_kv(r.out, "alpha")), "reflexive alpha");
    }

    // simulate: smoke and byte-identical reruns across worker counts
    {
        auto r = run(bin + " simulate --kind prial --reps 2 --n 50 --c 2 --seed 1 --out /tmp/ps_cli_r.csv"
                           " --methods mp,identity");
        check(r.exit_code == 0, "simulate exit code");
        std::ifstream in("/tmp/ps_cli_r.csv");
        std::string header;
        std::getline(in, header);
        check(header == "dist,n,c,method,prial_pct,se,reps,errors", "simulate header row");
    }
    {
        const std::string base = bin + " simulate --kind rosv --reps 4 --n 40 --c 2,3 --seed 9"
                                       " --methods mp_bf,target --out ";
        check(run(base + "/tmp/ps_cli_w1.csv --workers 1").exit_code == 0, "simulate w1");
        check(run(base + "/tmp/ps_cli_w2.csv --workers 2").exit_code == 0, "simulate w2");
        check(run(base + "/tmp/ps_cli_w8.csv --workers 8").exit_code == 0, "simulate w8");
        auto slurp = [](const std::string& path) {
            std::ifstream in(path);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        const std::string a = slurp("/tmp/ps_cli_w1.csv");
        check(!a.empty() && a == slurp("/tmp/ps_cli_w2.csv") && a == slurp("/tmp/ps_cli_w8.csv"),
              "simulate outputs byte-identical across workers");
    }
    // config file consumed, flags override
    {
        std::ofstream cfg("/tmp/ps_cli_cfg.txt");
        cfg << "kind=vconv\nn=60\nc=2\nreps=2\nseed=4\nmethods=v0\nt=1\n";
        cfg.close();
        auto r = run(bin + " simulate --config /tmp/ps_cli_cfg.txt --out /tmp/ps_cli_v.csv");
        check(r.exit_code == 0, "simulate config exit code");
        std::ifstream in("/tmp/ps_cli_v.csv");
        std::string header;
        std::getline(in, header);
        check(header == "dist,n,c,t,method,mean_ratio,sd,reps,errors", "vconv header row");
    }

    if (g_failures == 0) {
        std::cout << "cli_checks: all checks passed\n";
        return 0;
    }
    std::cout << "cli_checks: " << g_failures << " failures\n";
    return 1;
}
