from best_of_many import constants


class TestConstants:
    """Test cases for constants defined in best_of_many.constants."""

    def test_sdk_version_matches_package_version(self):
        """Test that SDK_VERSION matches the package __version__."""
        from best_of_many import __version__

        assert constants.SDK_VERSION == __version__

    def test_container_magic(self):
        """Test the container magic and format version."""
        assert constants.CHECKPOINT_MAGIC == b"BMS1"
        assert constants.FORMAT_VERSION == 1

    def test_objective_kind_values(self):
        """Test ObjectiveKind has all expected values."""
        assert {kind.value for kind in constants.ObjectiveKind} == {
            "mc",
            "cvae",
            "ms",
            "bms",
            "hybrid",
            "prior_bms",
            "regression",
        }

    def test_recognition_objectives(self):
        """Test which objectives train a recognition network."""
        assert constants.ObjectiveKind.BMS in constants.RECOGNITION_OBJECTIVES
        assert constants.ObjectiveKind.MC not in constants.RECOGNITION_OBJECTIVES
        assert constants.ObjectiveKind.PRIOR_BMS not in constants.RECOGNITION_OBJECTIVES

    def test_enums_are_string_enums(self):
        """Test that kinds compare equal to their string values."""
        assert issubclass(constants.TaskKind, str)
        assert constants.TaskKind.FORK_MAP == "fork_map"
        assert constants.ModelKind.IMAGE_SEQUENCE == "image_sequence"
