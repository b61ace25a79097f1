import numpy as np
import pytest

import patchcomp as pc
from patchcomp import RegionLabel
from patchcomp.landscape import StrategyVector


def vec(*values):
    return StrategyVector(values)


@pytest.fixture
def env2():
    return pc.PatchEnvironment(r=[1.0, 1.0], k=[1.0, 2.0])


class TestPredictOutcome:
    def test_table_examples(self, env2):
        d = np.ones(2)
        pred = pc.predict_outcome(vec(3), vec(2.5), d, d, env2)
        assert pred.global_verdict == "MutantWins"
        pred = pc.predict_outcome(vec(3), vec(4), d, d, env2)
        assert pred.global_verdict == "ResidentWins"
        pred = pc.predict_outcome(vec(3), vec(1), d, d, env2)
        assert pred.global_verdict == "Coexistence"

    def test_neutral_resident(self, env2):
        d = np.ones(2)
        pred = pc.predict_outcome(vec(2), vec(3), d, d, env2)
        assert pred.invade_when_rare == "Neutral"
        assert pred.global_verdict == "OutsideTheory"
        assert pred.region is RegionLabel.IFD_RESIDENT

    def test_plain_same_side_region_stays_open(self, env2):
        # invasion resolved, global dynamics not claimed
        d = np.ones(2)
        pred = pc.predict_outcome(vec(4), vec(3), d, d, env2)
        assert pred.region is RegionLabel.L1STAR
        pred = pc.predict_outcome(vec(4), vec(1.9), d, d, env2)
        assert pred.region is RegionLabel.L3

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_verdict_only_inside_resolved_regions(self, env2, seed):
        rng = np.random.default_rng(seed)
        allowed = {
            RegionLabel.L1STAR, RegionLabel.L2, RegionLabel.L3,
            RegionLabel.S1STAR, RegionLabel.S2, RegionLabel.S3,
            RegionLabel.IFD_RESIDENT,
        }
        for _ in range(100):
            p = vec(rng.uniform(0.3, 4.0))
            ph = vec(rng.uniform(0.3, 4.0))
            d = rng.uniform(0.3, 3.0, 2)
            dh = rng.uniform(0.3, 3.0, 2)
            pred = pc.predict_outcome(p, ph, d, dh, env2)
            if pred.global_verdict != "OutsideTheory":
                assert pred.region in allowed

    def test_truth_table_fidelity(self, env2):
        # every resolved table cell, one representative instance per row
        d = np.ones(2)
        up = 2.0 * np.ones(2)
        cells = [
            # resident above the ratio
            (vec(3), vec(4), d, up, "No", "ResidentWins"),        # farther, faster
            (vec(3), vec(2.5), up, d, "Yes", "MutantWins"),       # closer, slower
            (vec(3), vec(1.2), d, up, "Yes", "Coexistence"),      # opposite side
            # resident below the ratio
            (vec(1.2), vec(1.6), up, d, "Yes", "MutantWins"),     # closer, slower
            (vec(1.2), vec(0.8), d, up, "No", "ResidentWins"),    # farther, faster
            (vec(1.2), vec(3.0), d, up, "Yes", "Coexistence"),    # opposite side
        ]
        for p, ph, dd, dh, invade, verdict in cells:
            pred = pc.predict_outcome(p, ph, dd, dh, env2)
            assert pred.invade_when_rare == invade
            assert pred.global_verdict == verdict

    def test_role_swap_symmetry(self, env2):
        rng = np.random.default_rng(5)
        swap = {"ResidentWins": "MutantWins", "MutantWins": "ResidentWins"}
        for _ in range(60):
            p = vec(rng.uniform(0.3, 4.0))
            ph = vec(rng.uniform(0.3, 4.0))
            d = rng.uniform(0.3, 3.0, 2)
            dh = rng.uniform(0.3, 3.0, 2)
            a = pc.predict_outcome(p, ph, d, dh, env2)
            b = pc.predict_outcome(ph, p, dh, d, env2)
            if a.global_verdict in swap:
                assert b.global_verdict == swap[a.global_verdict]
            if a.global_verdict == "Coexistence":
                assert b.global_verdict == "Coexistence"


class TestStabilityTable:
    def test_exclusion_instance(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=80)
        resident = pc.SpeciesTraits([1.0, 1.0], pc.StrategyVector([5.0]))
        mutant = pc.SpeciesTraits([1.0, 1.0], pc.StrategyVector([3.0]))
        table = pc.stability_table(land, env, resident, mutant, grid)
        assert table.resident_state == "unstable"
        assert table.mutant_state == "stable"

    def test_coexistence_instance(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=80)
        resident = pc.SpeciesTraits([1.0, 1.0], pc.StrategyVector([3.0]))
        mutant = pc.SpeciesTraits([1.0, 1.0], pc.StrategyVector([1.5]))
        table = pc.stability_table(land, env, resident, mutant, grid)
        assert table.resident_state == "unstable"
        assert table.mutant_state == "unstable"

    def test_neutral_resident(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=40)
        resident = pc.SpeciesTraits([1.0, 1.0], pc.StrategyVector([2.0]))
        mutant = pc.SpeciesTraits([1.0, 1.0], pc.StrategyVector([3.0]))
        table = pc.stability_table(land, env, resident, mutant, grid)
        assert table.resident_state == "neutral"


class TestPip:
    def test_matrix_structure(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=60)
        residents = np.array([2.0, 2.6, 3.0])
        mutants = np.array([1.0, 2.3, 2.6, 3.0, 3.8])
        result = pc.pip(residents, mutants, [1.0, 1.0], land, env, grid)
        # the capacity-ratio resident row is entirely neutral
        assert np.all(result.signs[0] == 0)
        # diagonal entries (matching strategies) are neutral
        assert result.signs[1, 2] == 0
        assert result.signs[2, 3] == 0
        # resident 3.0: opposite side and closer-same-side invade, farther loses
        assert result.signs[2, 0] == 1
        assert result.signs[2, 1] == 1
        assert result.signs[2, 4] == -1

    def test_sign_antisymmetry_on_same_side_pairs(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=60)
        scan = np.array([2.4, 2.9, 3.5])
        result = pc.pip(scan, scan, [1.0, 1.0], land, env, grid)
        for i in range(3):
            for j in range(3):
                if i != j:
                    assert result.signs[i, j] == -result.signs[j, i]

    def test_needs_two_patches(self):
        land = pc.Landscape([0.0, 1.0, 2.0, 3.0])
        env = pc.PatchEnvironment(r=[1, 1, 1], k=[1, 2, 4])
        grid = pc.build_grid(land, per_patch=20)
        with pytest.raises(pc.ValidationError, match="two patches"):
            pc.pip([2.0], [2.0], [1.0, 1.0, 1.0], land, env, grid)

    def test_csv_shape(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=40)
        result = pc.pip([2.5, 3.0], [1.5, 2.0], [1.0, 1.0], land, env, grid)
        lines = result.to_csv().strip().split("\n")
        assert len(lines) == 3
        assert lines[0].startswith("resident_p\\mutant_p,")


class TestStrategyChecks:
    def test_ifd_is_convergent_and_invading(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=60)
        css = pc.css_check(2.0, 0.8, 4, land, env, [1.0, 1.0], grid)
        assert css.passed and css.margin > 1e-8
        nis = pc.nis_check(2.0, 0.8, 4, land, env, [1.0, 1.0], grid)
        assert nis.passed and nis.margin > 1e-8

    def test_off_ratio_strategy_is_not_ess(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=60)
        ess = pc.ess_check(3.0, 1.0, 4, land, env, [1.0, 1.0], grid)
        assert not ess.passed
        witnesses = [w[0] for w in ess.witnesses]
        assert any(2.0 < w < 3.0 for w in witnesses)

    def test_guard_band_excludes_degenerate_samples(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=40)
        ess = pc.ess_check(3.0, 1.0, 5, land, env, [1.0, 1.0], grid)
        # the sample landing exactly on the capacity ratio is dropped
        assert ess.samples == 9
        sampled = [w[0] for w in ess.witnesses]
        assert 2.0 not in sampled

    def test_sample_count_validation(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=20)
        with pytest.raises(pc.ValidationError):
            pc.ess_check(3.0, 1.0, 2, land, env, [1.0, 1.0], grid)


class TestCrossValidate:
    def test_matching_exclusion_row(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=50)
        resident = pc.SpeciesTraits([1.0, 1.0], pc.StrategyVector([1.3]))
        mutant = pc.SpeciesTraits([1.0, 1.0], pc.StrategyVector([0.7]))
        report = pc.cross_validate(land, env, resident, mutant, grid)
        assert report.status == "match"
        assert report.ok

    def test_outside_theory_skipped(self, unit_two_patch):
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=30)
        ifd = pc.SpeciesTraits([1.0, 1.0], pc.StrategyVector([2.0]))
        mutant = pc.SpeciesTraits([1.0, 1.0], pc.StrategyVector([3.0]))
        report = pc.cross_validate(land, env, ifd, mutant, grid)
        assert report.status == "skipped"
        assert report.simulated_verdict is None

    def test_randomized_faster_farther_mutants_always_lose(self, unit_two_patch):
        # resident-above instances with the mutant farther out and faster:
        # theory says resident wins; the simulation must agree every time
        land, env = unit_two_patch
        grid = pc.build_grid(land, per_patch=50)
        rng = np.random.default_rng(23)
        for _ in range(5):
            p = 2.0 * rng.uniform(1.4, 1.9)
            ph = p * rng.uniform(1.5, 2.0)
            d = rng.uniform(0.8, 1.2, 2)
            dh = d * rng.uniform(1.0, 1.3, 2)
            resident = pc.SpeciesTraits(d, pc.StrategyVector([p]))
            mutant = pc.SpeciesTraits(dh, pc.StrategyVector([ph]))
            report = pc.cross_validate(land, env, resident, mutant, grid)
            assert report.prediction.region is RegionLabel.L2
            assert report.status == "match", (p, ph, report.simulated_verdict)
