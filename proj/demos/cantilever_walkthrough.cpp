// Walks through the cantilever microgenerator analysis: damping split from
// loaded/open-circuit Q, base and proof-mass amplitudes, the matched load,
// and a transient check of the closed-form amplitude.
#include "harvest/harvest.hpp"

#include <cstdio>

int main() {
    using namespace harvest;

    const double wn = hz_to_rad_per_s(350.0);
    const auto split = analysis::decompose_damping(181.0, 216.0);
    std::printf("Q_E = %.1f  zeta_p = %.5f  zeta_e = %.6f\n", split.q_electrical, split.zeta_p,
                split.zeta_e);

    const auto y = base_amplitude_from_acceleration({3.0, AmplitudeConvention::rms}, wn);
    std::printf("Y = %.3g m (%s), z = QY = %.3g m\n", y.value,
                std::string(to_string(y.convention)).c_str(),
                analysis::estimate_mass_displacement(181.0, y.value));

    const auto g = make_generator(4.4e-4, wn, split.zeta_p);
    const CoilCircuit coil{400, 2.493176e-3, 0.41, 93.0, 0.0, 100.0};
    const double c_p = damping_coefficient_from_ratio(split.zeta_p, g);
    std::printf("optimal load = %.1f ohm\n", optimal_load(coil, c_p));

    const auto e = Excitation::from_acceleration({3.0, AmplitudeConvention::rms}, wn);
    const auto model = evaluate_response(g, coil, e);
    const auto run = sim::simulate(g, coil, e, sim::recommended_config(g, coil, wn, wn));
    std::printf("z model = %.4g m  z sim = %.4g m  P_L model = %.3g W  P_L sim = %.3g W\n",
                model.z_amplitude_m, run.z_amp_m, model.p_load_W, run.p_load_avg_W);
    return 0;
}
