import numpy as np
import pytest

from dcfair import DecisionVector, FeasibleDomain, Layout, LinearCrossModel, featurize, pack, project, score, unpack
from dcfair.scoring import LayoutError, featurize_matrix, load_model, save_model


def test_featurize_layout():
    assert featurize([2.0, -1.0], 3).tolist() == [1.0, 2.0, -1.0, 3.0, 6.0, -3.0]


def test_score_by_hand():
    m = LinearCrossModel(2, np.array([0.5, 1.0, 2.0, -1.0, 0.25, 0.0]))
    # 0.5 + 1*1 + 2*3 - 1*2 + 0.25*(2*1) + 0*(2*3)
    assert score(m, [1.0, 3.0], 2) == 0.5 + 1.0 + 6.0 - 2.0 + 0.5


def test_score_dimension_mismatch():
    with pytest.raises(LayoutError, match="d=3"):
        score(LinearCrossModel.zeros(2), [1.0, 2.0, 3.0], 1)


def test_model_rejects_wrong_length_and_nan():
    with pytest.raises(LayoutError):
        LinearCrossModel(2, np.zeros(5))
    with pytest.raises(LayoutError):
        LinearCrossModel(1, np.array([0.0, np.nan, 0.0, 0.0]))


def test_featurize_matrix_matches_rows():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((7, 3))
    g = rng.integers(1, 4, 7)
    phi = featurize_matrix(x, g)
    for i in range(7):
        assert np.array_equal(phi[i], featurize(x[i], g[i]))


def test_pack_unpack_roundtrip():
    v = pack([1.0, 2.0, 3.0, 4.0], [0.1, 0.2])
    assert v.layout == Layout(4, 2)
    w, t = unpack(v)
    assert w.tolist() == [1, 2, 3, 4] and t.tolist() == [0.1, 0.2]
    with pytest.raises(LayoutError):
        DecisionVector(np.zeros(5), Layout(4, 2))


def test_project_ball_and_box():
    v = np.array([3.0, 4.0])
    assert np.allclose(project(FeasibleDomain.ball(1.0), v), [0.6, 0.8])
    assert np.array_equal(project(FeasibleDomain.ball(10.0), v), v)
    box = FeasibleDomain.box([0.0, -1.0], [1.0, 1.0])
    assert project(box, v).tolist() == [1.0, 1.0]
    assert np.array_equal(project(FeasibleDomain(), v), v)
    with pytest.raises(ValueError):
        FeasibleDomain.box([1.0], [0.0])


def test_save_load_exact(tmp_path):
    rng = np.random.default_rng(2)
    v = DecisionVector(rng.standard_normal(9) * 1e-7, Layout(6, 3))
    save_model(tmp_path / "m.json", v)
    back = load_model(tmp_path / "m.json")
    assert back.layout == v.layout
    assert np.array_equal(back.packed, v.packed)


def test_load_model_inconsistent(tmp_path):
    (tmp_path / "m.json").write_text('{"d": 3, "layout": {"model_len": 6, "theta_len": 0}, "packed": [0,0,0,0,0,0]}')
    with pytest.raises(LayoutError, match="inconsistent"):
        load_model(tmp_path / "m.json")
    (tmp_path / "n.json").write_text("not json")
    with pytest.raises(LayoutError, match="cannot parse"):
        load_model(tmp_path / "n.json")
