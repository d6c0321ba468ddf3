import pytest

from metadesign import helpers as h
from metadesign.errors import ObjectNotFound, ValidationError
from metadesign.models.enums import BaselineKind


class TestErrors:

    def test_validation_error_message(self):
        assert str(ValidationError({"dims": "Missing value"})) == "dims: Missing value"
        assert ValidationError("plain").error_dict == {"message": "plain"}

    def test_several_fields(self):
        error = ValidationError({"a": "bad", "b": "worse"})
        assert str(error) == "a: bad; b: worse"


class TestProblemHelpers:

    def test_options(self):
        assert "onemax" in h.problem_keys()
        assert "ising_torus" in h.problem_keys()
        assert h.baseline_kinds() == ["ILS", "SA", "TS", "GA"]

    def test_normalize_problem(self):
        instance = h.normalize_problem_strict(" onemax:12 ")
        assert instance.d == 12
        assert h.normalize_problem_strict("leadingones", dim=7).d == 7

    @pytest.mark.parametrize("key", [None, "", "sphere:10", "onemax:0"])
    def test_normalize_problem_invalid(self, key):
        with pytest.raises(ValidationError):
            h.normalize_problem_strict(key)

    @pytest.mark.parametrize("dims, expected", [
        ("50 100", (50, 100)),
        ("50,100", (50, 100)),
        ([50, 100], (50, 100)),
        (20, (20,)),
        (None, ()),
        ("", ()),
    ])
    def test_normalize_dims(self, dims, expected):
        assert h.normalize_dims_strict(dims) == expected

    @pytest.mark.parametrize("dims", ["a b", "10 -1", [0]])
    def test_normalize_dims_invalid(self, dims):
        with pytest.raises(ValidationError):
            h.normalize_dims_strict(dims)

    def test_baseline_kinds(self):
        assert h.normalize_baseline_kinds_strict(None) == list(BaselineKind)
        assert h.normalize_baseline_kinds_strict("ga, ils") == [BaselineKind.GA, BaselineKind.ILS]
        with pytest.raises(ValidationError):
            h.normalize_baseline_kinds_strict(["es"])


class TestProgramHelpers:

    def test_read_program_text(self):
        program = h.read_program({"program": " reinitialize | forward | once \n"})
        assert str(program) == "reinitialize | forward | once"

    def test_read_program_file(self, tmp_path):
        path = tmp_path / "ils.txt"
        path.write_text("reinitialize | forward | once\n")
        assert len(h.read_program({"program_file": str(path)})) == 1

    def test_read_program_missing(self, tmp_path):
        with pytest.raises(ValidationError):
            h.read_program({})
        with pytest.raises(ObjectNotFound):
            h.read_program({"program_file": str(tmp_path / "none.txt")})

    def test_run_seed(self):
        seeds = [h.run_seed(7, r) for r in range(5)]
        assert seeds == [h.run_seed(7, r) for r in range(5)]
        assert len(set(seeds)) == 5
        assert h.run_seed(8, 0) != seeds[0]
        assert all(isinstance(s, int) for s in seeds)
