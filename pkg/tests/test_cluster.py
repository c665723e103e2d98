import numpy as np
import pytest

from clusterft import cluster
from clusterft.cluster import ClusterGraph
from clusterft.noise import NoiseParams
from clusterft.pauli import PauliString, propagate_frame


def test_graph_validation():
    with pytest.raises(ValueError):
        ClusterGraph(("plus", "plus"), ((0, 0, "verified"),))
    with pytest.raises(ValueError):
        ClusterGraph(("plus", "plus"), ((0, 1, "verified"), (1, 0, "verified")))
    with pytest.raises(ValueError):
        ClusterGraph(("plus", "plus"), ((0, 1, "non-verified"),))
    with pytest.raises(ValueError):
        ClusterGraph(("plus", "qubit"))
    g = ClusterGraph(("plus", "plus"), ((0, 1, "non-verified"),), levels=(4, 4))
    assert g.neighbors(0) == [1]


def test_star():
    g = ClusterGraph.star(4, "pi8")
    assert g.kinds[0] == "pi8" and g.neighbors(0) == [1, 2, 3, 4]
    assert g.levels == (2,) * 5


def test_subcluster_needs_verified_edges():
    g = ClusterGraph(("plus", "plus"), ((0, 1, "non-verified"),), levels=(4, 4))
    with pytest.raises(ValueError):
        cluster.subcluster_stage(g)


def test_scenarios():
    with pytest.raises(ValueError):
        cluster.ScenarioSpec("iv")
    assert cluster.scenario_rotations("ii") == ("I", "S")
    assert cluster.scenario_rotations("i") == ("I",)
    for case in cluster.SCENARIOS:
        lay = cluster.scenario_layout(case)
        assert len(lay.measured) == 7
        assert len(lay.neighbors) == (1 if case == "iii" else 4)
        ex = cluster.scenario_circuit(case)
        assert ex.stage is lay.stage


def test_connection_spreads_x_to_z():
    rng = np.random.default_rng(0)
    left = PauliString(7, 0b1, 0)
    l2, r2 = cluster.connect_nonverified(left, PauliString(7), NoiseParams(0.0), rng)
    assert l2 == left and r2 == PauliString(7, 0, 0b1)


def test_transversal_measure_rotations():
    rng = np.random.default_rng(0)
    noise = NoiseParams(0.0)
    x_err = PauliString(7, 0b11, 0)
    assert cluster.transversal_measure(x_err, "I", noise, rng)[1] == 0
    # S maps X to Y, which flips an X-basis readout
    assert cluster.transversal_measure(x_err, "S", noise, rng)[1] == 0b11
    with pytest.raises(ValueError):
        cluster.transversal_measure(x_err, "T", noise, rng)


@pytest.mark.parametrize("case", cluster.SCENARIOS)
@pytest.mark.parametrize("rotation", ["I", "S"])
def test_noiseless_scenarios_give_no_flips(case, rotation):
    circ, regs = cluster.measured_scenario(case, rotation)
    frame = propagate_frame(circ, None, {}, np.random.default_rng(1))
    assert circ.accepts(frame.flip_mask)
    assert not frame.flipped_measurements


def test_pi8_stage_shape():
    st = cluster.pi8_stage()
    labels = [label for _, _, label in st.inputs]
    assert labels == ["zero", "box3X.1", "box3X.2"]
    ops = [loc.op for loc in st.circuit.locations]
    assert ops.count("CH") == 7 * 3 and ops.count("SDG") == 7


def test_prepare_subcluster_noiseless():
    rng = np.random.default_rng(2)
    frames, ok, cost = cluster.prepare_subcluster(ClusterGraph.star(2), NoiseParams(0.0), rng)
    assert ok and all(f.is_identity() for f in frames) and cost["gates"] > 0
    block, ok, _ = cluster.prepare_pi8_qubit(NoiseParams(0.0), rng)
    assert ok and block.is_identity()


def test_score():
    assert not cluster.score(0b1) and cluster.score(0b11)
