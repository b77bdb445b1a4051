from tmspace import calibration, rulecodec


def test_conventions_enumerates_the_whole_layout_family():
    all_conventions = list(calibration.conventions())
    assert len(all_conventions) == 384
    assert len(set(all_conventions)) == 384
    assert calibration.FROZEN in all_conventions


def test_calibration_isolates_a_unique_convention():
    survivors = calibration.calibrate()
    assert survivors == [calibration.FROZEN]


def test_frozen_convention_matches_the_production_codec():
    convention = calibration.check_convention()
    params = rulecodec.SpaceParams(2, 2)
    for rule in range(0, 4096, 61):
        via_convention = calibration.decode_with(convention, rule, params)
        assert via_convention.table == rulecodec.decode(rule, params).table


def test_encode_with_inverts_decode_with():
    params = rulecodec.SpaceParams(2, 2)
    for rule in (0, 378, 2506, 4095):
        machine = calibration.decode_with(calibration.FROZEN, rule, params)
        assert (
            calibration.encode_with(calibration.FROZEN, machine.table, params) == rule
        )
