import numpy as np
import pytest

from skfeeg.geometry import assemble_lead_field, build_electrode_array, build_source_space
from skfeeg.signals import (
    add_noise,
    hann_bump,
    make_sep_waveforms,
    noise_std_for,
    place_sources,
    source_states,
    synthesize_measurements,
)


@pytest.fixture(scope="module")
def scene():
    space = build_source_space(0.012, 0.078, min_z=0.0)
    lead = assemble_lead_field(space, build_electrode_array(64, 0.09), 0.33)
    placement = place_sources(space, (-0.012, 0, 0.012), (0, 0, 1), (-0.036, 0, 0.06), (0, 1, 0))
    waves = make_sep_waveforms(1e-4, 4e-3, 1.5e-3, 2.5e-3, 2e-3, 10.0)
    return space, lead, placement, waves


def test_hann_values():
    c, w, a = 1.5e-3, 2e-3, 10.0
    assert hann_bump(c, c, w, a) == a
    assert hann_bump(c - w / 2, c, w, a) == pytest.approx(0.0, abs=1e-15)
    assert hann_bump(c + w / 2, c, w, a) == pytest.approx(0.0, abs=1e-15)
    assert hann_bump(c + w / 4, c, w, a) == pytest.approx(a / 2, rel=1e-12)
    assert hann_bump(c + w, c, w, a) == 0.0


def test_waveform_grid(scene):
    *_, waves = scene
    assert waves.n_steps == 40
    assert waves.peak_indices() == (15, 25)
    assert waves.deep[15] == pytest.approx(10.0, rel=1e-12)
    assert waves.deep.min() >= 0


def test_waveform_support_outside_window():
    with pytest.raises(ValueError):
        make_sep_waveforms(1e-4, 4e-3, 0.5e-3, 2.5e-3, 2e-3, 10.0)
    with pytest.raises(ValueError):
        make_sep_waveforms(1e-4, 4e-3, 1.5e-3, 3.5e-3, 2e-3, 10.0)


def test_prose_timing_fits():
    w = make_sep_waveforms(1e-4, 4e-3, 1.0e-3, 3.0e-3, 2e-3, 10.0)
    assert w.peak_indices() == (10, 30)


def test_zero_waveforms_give_zero_measurements(scene):
    _, lead, placement, waves = scene
    silent = waves.only("deep").only("superficial")
    assert not synthesize_measurements(lead, placement, silent).any()


def test_single_term_superposition(scene):
    _, lead, placement, waves = scene
    deep_only = waves.only("deep")
    Y = synthesize_measurements(lead, placement, deep_only)
    t = 15
    expected = deep_only.deep[t] * 1e-9 * (lead.node_block(placement.deep_node)
                                            @ placement.deep_moment_dir)
    np.testing.assert_allclose(Y[:, t], expected, rtol=1e-14)


def test_superposition(scene):
    _, lead, placement, waves = scene
    both = synthesize_measurements(lead, placement, waves)
    parts = (synthesize_measurements(lead, placement, waves.only("deep"))
             + synthesize_measurements(lead, placement, waves.only("superficial")))
    assert np.abs(both - parts).max() <= 1e-12 * np.abs(both).max()


def test_measurements_equal_lead_times_states(scene):
    space, lead, placement, waves = scene
    X = source_states(placement, waves, space.state_dim)
    Y = synthesize_measurements(lead, placement, waves)
    np.testing.assert_allclose(Y, lead.scaled(1e-9) @ X, rtol=1e-10, atol=1e-22)


def test_noise_std_rule():
    clean = np.zeros((2, 3))
    clean[1, 2] = -1.0
    assert noise_std_for(clean, 20.0) == pytest.approx(0.1, rel=1e-15)
    with pytest.raises(ValueError):
        add_noise(np.zeros((2, 3)), 20.0, seed=1)


def test_noise_deterministic():
    clean = np.ones((4, 5))
    a = add_noise(clean, 10.0, seed=7)
    b = add_noise(clean, 10.0, seed=7)
    c = add_noise(clean, 10.0, seed=8)
    assert np.array_equal(a.noisy, b.noisy)
    assert not np.array_equal(a.noisy, c.noisy)


def test_noise_level_large_sample():
    clean = np.zeros((100, 1000))
    clean[0, 0] = 2.0
    ms = add_noise(clean, 20.0, seed=3)
    resid = ms.noisy - clean
    assert ms.noise_std == pytest.approx(0.2)
    assert abs(resid.std() / ms.noise_std - 1.0) < 0.02


def test_peak_snr_round_trip(scene):
    _, lead, placement, waves = scene
    clean = synthesize_measurements(lead, placement, waves)
    ms = add_noise(clean, 17.5, seed=11)
    snr = 20 * np.log10(np.abs(ms.clean).max() / ms.noise_std)
    assert snr == pytest.approx(17.5, rel=1e-9)


def test_sources_at_distinct_depths(scene):
    space, _, placement, _ = scene
    r_deep = np.linalg.norm(space.nodes[placement.deep_node])
    assert (0.078 - r_deep) / 0.078 >= 0.6
    assert r_deep < np.linalg.norm(space.nodes[placement.superficial_node])


def test_placement_rejects_shared_node(scene):
    space = scene[0]
    with pytest.raises(ValueError):
        place_sources(space, (0, 0, 0.03), (0, 0, 1), (0, 0, 0.03), (0, 1, 0))
