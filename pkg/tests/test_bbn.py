"""Belief network: fitting, exact inference, navigation, persistence.

The inference oracle enumerates the full joint distribution assignment by
assignment, filtering on the evidence as it goes. The production code
marginalizes analytically over the stored support plus a factorized
complement, so agreement between the two is a real cross-check, not an echo.
"""

import json

import numpy as np
import pytest

from _bbn_oracle import (
    enumerate_infer,
    enumerate_map,
    free_variables,
    random_evidence,
    random_model,
    unit_bins,
)
from mapnav import bbn
from mapnav.bbn import (
    BbnModel,
    BbnStructure,
    Evidence,
    InconsistentEvidenceError,
    ModelFormatError,
    StateSpaceTooLargeError,
)
from mapnav.discretize import DiscretizationScheme

ORACLE_TOL = 1e-9


class TestInferenceAgainstEnumeration:
    def test_forty_random_models_with_mixed_evidence(self):
        rng = np.random.default_rng(2024)
        checked = 0
        for _ in range(40):
            model = random_model(rng)
            for _ in range(3):
                evidence = random_evidence(rng, model)
                query = free_variables(model, evidence)
                if not query:
                    continue
                expected, z_expected = enumerate_infer(model, evidence, query)
                if z_expected <= 0.0:
                    with pytest.raises(InconsistentEvidenceError):
                        bbn.infer(model, evidence, query)
                    continue
                got = bbn.infer(model, evidence, query)
                assert got.evidence_probability == pytest.approx(
                    z_expected, abs=ORACLE_TOL, rel=ORACLE_TOL
                )
                for n in query:
                    np.testing.assert_allclose(
                        got.posteriors[n], expected[n], atol=ORACLE_TOL
                    )
                checked += 1
        assert checked >= 80  # enough non-degenerate cases actually ran

    def test_posteriors_sum_to_one(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            model = random_model(rng)
            evidence = random_evidence(rng, model)
            try:
                result = bbn.infer(model, evidence)
            except InconsistentEvidenceError:
                continue
            for vec in result.posteriors.values():
                assert abs(vec.sum() - 1.0) <= 1e-9

    def test_no_evidence_probability_is_one(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            model = random_model(rng)
            result = bbn.infer(model)
            assert result.evidence_probability == pytest.approx(1.0, abs=1e-12)

    def test_more_evidence_never_raises_probability(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            model = random_model(rng)
            e2 = random_evidence(rng, model)
            if not e2.names or not free_variables(model, e2):
                continue
            # drop one constraint to get a strictly weaker evidence set
            names = sorted(e2.names)
            drop = names[int(rng.integers(0, len(names)))]
            e1 = Evidence(
                hard={k: v for k, v in e2.hard.items() if k != drop},
                soft={k: v for k, v in e2.soft.items() if k != drop},
            )
            def z_of(e):
                try:
                    return bbn.infer(model, e).evidence_probability
                except InconsistentEvidenceError:
                    return 0.0
            assert z_of(e2) <= z_of(e1) + 1e-12

    def test_full_hard_input_evidence_returns_stored_row(self):
        rng = np.random.default_rng(10)
        model = random_model(rng)
        while len(model.support) == 0:
            model = random_model(rng)
        config = model.support[0]
        hard = {n: int(config[j]) for j, n in enumerate(model.structure.inputs)}
        out0 = model.structure.outputs[0]
        result = bbn.infer(model, Evidence(hard=hard), query=[out0])
        np.testing.assert_allclose(
            result.posteriors[out0], model.cpt[out0][0], atol=1e-12
        )

    def test_unseen_configuration_falls_back_to_marginal(self):
        # two inputs, support holds only (0, 0); query outputs at (1, 1)
        structure = BbnStructure(inputs=("i0", "i1"), outputs=("o0",))
        scheme = DiscretizationScheme(
            [unit_bins("i0", 2), unit_bins("i1", 2), unit_bins("o0", 3)]
        )
        model = BbnModel(
            structure=structure,
            priors={"i0": np.array([0.5, 0.5]), "i1": np.array([0.5, 0.5])},
            support=np.array([[0, 0]]),
            cpt={"o0": np.array([[0.8, 0.1, 0.1]])},
            fallback={"o0": np.array([0.2, 0.3, 0.5])},
            scheme=scheme,
            alpha=1.0,
            n_rows=10,
        )
        result = bbn.infer(model, Evidence(hard={"i0": 1, "i1": 1}), query=["o0"])
        np.testing.assert_allclose(result.posteriors["o0"], [0.2, 0.3, 0.5], atol=1e-12)


class TestEvidenceValidation:
    def setup_method(self):
        self.model = random_model(np.random.default_rng(1))

    def test_rejects_overlap_between_hard_and_soft(self):
        with pytest.raises(ValueError, match="both"):
            Evidence(hard={"i0": 0}, soft={"i0": (1,)})

    def test_rejects_empty_soft_set(self):
        with pytest.raises(ValueError, match="at least one"):
            Evidence(soft={"i0": ()})

    def test_rejects_unknown_variable(self):
        with pytest.raises(ValueError, match="unknown"):
            bbn.infer(self.model, Evidence(hard={"nope": 0}))

    def test_rejects_bin_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            bbn.infer(self.model, Evidence(hard={"i0": 99}))

    def test_rejects_query_of_hard_variable(self):
        with pytest.raises(ValueError, match="fixed"):
            bbn.infer(self.model, Evidence(hard={"i0": 0}), query=["i0"])

    def test_inconsistent_evidence_raises(self):
        structure = BbnStructure(inputs=("i0",), outputs=("o0",))
        scheme = DiscretizationScheme([unit_bins("i0", 2), unit_bins("o0", 2)])
        model = BbnModel(
            structure=structure,
            priors={"i0": np.array([1.0, 0.0])},
            support=np.zeros((0, 1), dtype=np.int64),
            cpt={"o0": np.zeros((0, 2))},
            fallback={"o0": np.array([0.5, 0.5])},
            scheme=scheme,
            alpha=0.0,
            n_rows=5,
        )
        with pytest.raises(InconsistentEvidenceError):
            bbn.infer(model, Evidence(hard={"i0": 1}))


class TestFit:
    def test_smoothed_counts_by_hand(self):
        # three rows, one input with 2 bins, one output with 2 bins
        structure = BbnStructure(inputs=("x",), outputs=("y",))
        scheme = DiscretizationScheme([unit_bins("x", 2), unit_bins("y", 2)])
        xb = np.array([[0], [0], [1]])
        yb = np.array([[0], [1], [1]])
        model = bbn.fit(xb, yb, structure, scheme, alpha=1.0)
        # priors: (2+1)/(3+2), (1+1)/(3+2)
        np.testing.assert_allclose(model.priors["x"], [3 / 5, 2 / 5])
        # config (0,): y counts [1, 1] -> (1+1)/(2+2) each
        # config (1,): y counts [0, 1] -> [1/3, 2/3]
        assert model.support.tolist() == [[0], [1]]
        np.testing.assert_allclose(model.cpt["y"][0], [0.5, 0.5])
        np.testing.assert_allclose(model.cpt["y"][1], [1 / 3, 2 / 3])
        # fallback: marginal (1+1)/(3+2), (2+1)/(3+2)
        np.testing.assert_allclose(model.fallback["y"], [2 / 5, 3 / 5])

    def test_alpha_zero_is_maximum_likelihood(self):
        structure = BbnStructure(inputs=("x",), outputs=("y",))
        scheme = DiscretizationScheme([unit_bins("x", 2), unit_bins("y", 2)])
        xb = np.array([[0], [0], [1], [1]])
        yb = np.array([[0], [0], [1], [1]])
        model = bbn.fit(xb, yb, structure, scheme, alpha=0.0)
        np.testing.assert_allclose(model.cpt["y"][0], [1.0, 0.0])
        np.testing.assert_allclose(model.cpt["y"][1], [0.0, 1.0])

    def test_joint_sums_to_one_over_all_assignments(self):
        rng = np.random.default_rng(12)
        xb = rng.integers(0, 3, (50, 2))
        yb = rng.integers(0, 2, (50, 1))
        structure = BbnStructure(inputs=("a", "b"), outputs=("y",))
        scheme = DiscretizationScheme(
            [unit_bins("a", 3), unit_bins("b", 3), unit_bins("y", 2)]
        )
        model = bbn.fit(xb, yb, structure, scheme, alpha=1.0)
        total = 0.0
        for a in range(3):
            for b in range(3):
                for y in range(2):
                    total += bbn.joint_probability(model, {"a": a, "b": b, "y": y})
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_rejects_negative_alpha_and_bad_bins(self):
        structure = BbnStructure(inputs=("x",), outputs=("y",))
        scheme = DiscretizationScheme([unit_bins("x", 2), unit_bins("y", 2)])
        with pytest.raises(ValueError):
            bbn.fit(np.array([[0]]), np.array([[0]]), structure, scheme, alpha=-1.0)
        with pytest.raises(ValueError, match="x"):
            bbn.fit(np.array([[5]]), np.array([[0]]), structure, scheme)


class TestMostProbableConfiguration:
    def test_matches_enumeration_on_random_models(self):
        rng = np.random.default_rng(77)
        for _ in range(25):
            model = random_model(rng, max_inputs=4, max_bins=3)
            evidence = random_evidence(rng, model)
            expected, p_expected = enumerate_map(model, evidence)
            got = bbn.most_probable_configuration(model, evidence)
            assert got.probability == pytest.approx(p_expected, rel=1e-12, abs=1e-15)
            assert got.assignment == expected

    def test_uniform_model_without_evidence_picks_all_zeros(self):
        structure = BbnStructure(inputs=("a", "b"), outputs=("y",))
        scheme = DiscretizationScheme(
            [unit_bins("a", 3), unit_bins("b", 2), unit_bins("y", 4)]
        )
        model = BbnModel(
            structure=structure,
            priors={"a": np.full(3, 1 / 3), "b": np.full(2, 1 / 2)},
            support=np.zeros((0, 2), dtype=np.int64),
            cpt={"y": np.zeros((0, 4))},
            fallback={"y": np.full(4, 1 / 4)},
            scheme=scheme,
            alpha=1.0,
            n_rows=1,
        )
        got = bbn.most_probable_configuration(model)
        assert got.assignment == {"a": 0, "b": 0, "y": 0}

    def test_state_space_cap_raises_with_the_count(self):
        n_in = 13
        names = tuple(f"i{j}" for j in range(n_in))
        structure = BbnStructure(inputs=names, outputs=("y",))
        scheme = DiscretizationScheme(
            [unit_bins(n, 4) for n in names] + [unit_bins("y", 2)]
        )
        model = BbnModel(
            structure=structure,
            priors={n: np.full(4, 0.25) for n in names},
            support=np.zeros((0, n_in), dtype=np.int64),
            cpt={"y": np.zeros((0, 2))},
            fallback={"y": np.array([0.5, 0.5])},
            scheme=scheme,
            alpha=1.0,
            n_rows=1,
        )
        expected_count = 4**n_in * 2
        with pytest.raises(StateSpaceTooLargeError, match=str(expected_count)):
            bbn.most_probable_configuration(model)


class TestNavigation:
    def trained(self) -> BbnModel:
        rng = np.random.default_rng(5)
        xb = rng.integers(0, 3, (300, 2))
        # output bin tracks input a, with noise on input b
        yb = ((xb[:, 0] + rng.integers(0, 2, 300)) % 3).reshape(-1, 1)
        structure = BbnStructure(inputs=("a", "b"), outputs=("y",))
        scheme = DiscretizationScheme(
            [unit_bins("a", 3), unit_bins("b", 3), unit_bins("y", 3)]
        )
        return bbn.fit(xb, yb, structure, scheme, alpha=1.0)

    def test_posteriors_match_infer_exactly(self):
        model = self.trained()
        nav = bbn.navigate(model, targets={"y": [2]}, fixed={"b": 1})
        ref = bbn.infer(
            model, Evidence(hard={"b": 1}, soft={"y": (2,)}), query=["a"]
        )
        assert nav.evidence_probability == ref.evidence_probability
        np.testing.assert_array_equal(nav.posteriors["a"], ref.posteriors["a"])

    def test_recommends_argmax_with_scheme_labels(self):
        model = self.trained()
        nav = bbn.navigate(model, targets={"y": [0]})
        assert set(nav.recommended) == {"a", "b"}
        a = nav.recommended["a"]
        assert nav.posteriors["a"][a] == nav.posteriors["a"].max()
        assert nav.labels["a"] == model.scheme.label("a", a)

    def test_ties_resolve_to_the_lower_bin(self):
        structure = BbnStructure(inputs=("a",), outputs=("y",))
        scheme = DiscretizationScheme([unit_bins("a", 3), unit_bins("y", 2)])
        model = BbnModel(
            structure=structure,
            priors={"a": np.full(3, 1 / 3)},
            support=np.zeros((0, 1), dtype=np.int64),
            cpt={"y": np.zeros((0, 2))},
            fallback={"y": np.array([0.5, 0.5])},
            scheme=scheme,
            alpha=1.0,
            n_rows=1,
        )
        nav = bbn.navigate(model, targets={"y": [0, 1]})
        assert nav.recommended["a"] == 0  # exact three-way tie

    def test_rejects_targets_on_inputs_and_fixed_on_outputs(self):
        model = self.trained()
        with pytest.raises(ValueError, match="not an output"):
            bbn.navigate(model, targets={"a": [0]})
        with pytest.raises(ValueError, match="not an input"):
            bbn.navigate(model, targets={"y": [0]}, fixed={"y": 0})
        with pytest.raises(ValueError, match="nothing to recommend"):
            bbn.navigate(model, targets={"y": [0]}, fixed={"a": 0, "b": 0})


class TestPersistence:
    def battery(self, model: BbnModel) -> list[Evidence]:
        outs = model.structure.outputs
        ins = model.structure.inputs
        return [
            Evidence(),
            Evidence(hard={ins[0]: 0}),
            Evidence(soft={outs[0]: (0, model.card(outs[0]) - 1)}),
            Evidence(hard={ins[0]: 1}, soft={outs[0]: (0,)}),
        ]

    def test_save_load_keeps_inference_bit_exact(self, tmp_path):
        rng = np.random.default_rng(95)
        model = random_model(rng)
        while model.card(model.structure.inputs[0]) < 2 or len(model.support) == 0:
            model = random_model(rng)
        path = str(tmp_path / "model.json")
        bbn.save_model(model, path)
        again = bbn.load_model(path)
        for evidence in self.battery(model):
            try:
                a = bbn.infer(model, evidence)
            except InconsistentEvidenceError:
                with pytest.raises(InconsistentEvidenceError):
                    bbn.infer(again, evidence)
                continue
            b = bbn.infer(again, evidence)
            assert a.evidence_probability == b.evidence_probability
            for n in a.posteriors:
                assert a.posteriors[n].tolist() == b.posteriors[n].tolist()

    def test_file_is_one_json_document_with_expected_sections(self, tmp_path):
        model = random_model(np.random.default_rng(3))
        path = str(tmp_path / "model.json")
        bbn.save_model(model, path)
        with open(path) as fh:
            doc = json.load(fh)
        assert set(doc) >= {"structure", "priors", "cpts", "scheme", "metadata"}

    def test_corrupt_cpt_row_is_rejected_naming_the_node(self, tmp_path):
        model = random_model(np.random.default_rng(4))
        while len(model.support) == 0:
            model = random_model(np.random.default_rng(5))
        path = str(tmp_path / "model.json")
        bbn.save_model(model, path)
        with open(path) as fh:
            doc = json.load(fh)
        out0 = model.structure.outputs[0]
        doc["cpts"][out0]["rows"][0][0] += 0.5
        with open(path, "w") as fh:
            json.dump(doc, fh)
        with pytest.raises(ModelFormatError, match=out0):
            bbn.load_model(path)

    def test_missing_scheme_is_a_structured_error(self, tmp_path):
        model = random_model(np.random.default_rng(6))
        path = str(tmp_path / "model.json")
        bbn.save_model(model, path)
        with open(path) as fh:
            doc = json.load(fh)
        del doc["scheme"]
        with open(path, "w") as fh:
            json.dump(doc, fh)
        with pytest.raises(ModelFormatError, match="scheme"):
            bbn.load_model(path)

    def test_unparseable_file_is_a_structured_error(self, tmp_path):
        path = str(tmp_path / "model.json")
        with open(path, "w") as fh:
            fh.write("{broken")
        with pytest.raises(ModelFormatError, match="JSON"):
            bbn.load_model(path)
