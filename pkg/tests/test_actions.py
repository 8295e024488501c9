import pytest
from hypothesis import given, strategies as st

from mar.actions import (
    Back,
    Enter,
    Home,
    OpenApp,
    OutcomeLabel,
    Swipe,
    Tap,
    TapTypeEnter,
    TypeText,
    Wait,
    action_name,
    parse_action,
    render_action,
    validate_action,
)
from mar.errors import OutOfBounds, ParseError
from mar.memory import Screenshot

SCREEN = Screenshot(image=b"{}", width=1080, height=2400, source="sim", screen_id="s")


class TestParse:
    def test_open_app_surface_form(self):
        assert parse_action('Open_App at {"app_name": "Maps"}') == OpenApp("Maps")

    def test_enter_surface_form(self):
        assert parse_action("Enter at null") == Enter()

    def test_swipe_surface_form(self):
        parsed = parse_action('Swipe at {"x1": 630, "y1": 1400, "x2": 630, "y2": 280}')
        assert parsed == Swipe(630, 1400, 630, 280)

    def test_tap_surface_form(self):
        assert parse_action('Tap at {"x": 404, "y": 260}') == Tap(404, 260)

    def test_composite_surface_form(self):
        parsed = parse_action(
            'Tap_Type_and_Enter at {"x": 200, "y": 250, "text": "ramen in Chicago Loop"}'
        )
        assert parsed == TapTypeEnter(200, 250, "ramen in Chicago Loop")

    def test_surrounding_whitespace_tolerated(self):
        assert parse_action('  Tap at {"x": 1, "y": 2}  \n') == Tap(1, 2)

    def test_unknown_name_rejected(self):
        with pytest.raises(ParseError):
            parse_action('Fly at {"x": 1}')

    def test_missing_argument_rejected(self):
        with pytest.raises(ParseError):
            parse_action('Tap at {"x": 1}')

    def test_extra_argument_rejected(self):
        with pytest.raises(ParseError):
            parse_action('Tap at {"x": 1, "y": 2, "z": 3}')

    def test_non_integer_coordinate_rejected(self):
        with pytest.raises(ParseError):
            parse_action('Tap at {"x": 1.5, "y": 2}')

    def test_boolean_coordinate_rejected(self):
        with pytest.raises(ParseError):
            parse_action('Tap at {"x": true, "y": 2}')

    def test_negative_coordinate_rejected(self):
        with pytest.raises(ParseError):
            parse_action('Tap at {"x": -1, "y": 2}')

    def test_argument_free_requires_null(self):
        with pytest.raises(ParseError):
            parse_action("Enter at {}")

    def test_not_an_action_line(self):
        with pytest.raises(ParseError):
            parse_action("hello world")


class TestRender:
    def test_tap(self):
        assert render_action(Tap(404, 260)) == 'Tap at {"x": 404, "y": 260}'

    def test_home(self):
        assert render_action(Home()) == "Home at null"

    def test_composite(self):
        assert render_action(TapTypeEnter(200, 250, "ramen in Chicago Loop")) == (
            'Tap_Type_and_Enter at {"x": 200, "y": 250, "text": "ramen in Chicago Loop"}'
        )

    def test_type_text_verbatim(self):
        assert render_action(TypeText("a  b \t c")) == 'Type at {"text": "a  b \\t c"}'


coords = st.integers(min_value=0, max_value=5000)
texts = st.text(min_size=0, max_size=40)
app_names = st.text(min_size=1, max_size=20)

actions = st.one_of(
    st.builds(OpenApp, app_names),
    st.builds(Tap, coords, coords),
    st.builds(Swipe, coords, coords, coords, coords),
    st.builds(TypeText, texts),
    st.just(Enter()),
    st.just(Back()),
    st.just(Home()),
    st.just(Wait()),
    st.builds(TapTypeEnter, coords, coords, texts),
)


@given(actions)
def test_round_trip(action):
    assert parse_action(render_action(action)) == action


def test_action_name_covers_all_variants():
    names = {
        action_name(a)
        for a in (
            OpenApp("x"),
            Tap(0, 0),
            Swipe(0, 0, 0, 0),
            TypeText(""),
            Enter(),
            Back(),
            Home(),
            Wait(),
            TapTypeEnter(0, 0, ""),
        )
    }
    assert names == {
        "Open_App",
        "Tap",
        "Swipe",
        "Type",
        "Enter",
        "Back",
        "Home",
        "Wait",
        "Tap_Type_and_Enter",
    }


class TestValidate:
    def test_in_bounds_tap(self):
        validate_action(Tap(404, 260), SCREEN)

    def test_out_of_bounds_tap(self):
        with pytest.raises(OutOfBounds) as err:
            validate_action(Tap(5000, 10), SCREEN)
        assert err.value.value == 5000

    def test_boundary_is_exclusive(self):
        with pytest.raises(OutOfBounds):
            validate_action(Tap(1080, 0), SCREEN)

    def test_swipe_checks_both_endpoints(self):
        with pytest.raises(OutOfBounds):
            validate_action(Swipe(0, 0, 10, 2400), SCREEN)

    def test_wait_has_no_coordinates(self):
        validate_action(Wait(), SCREEN)


class TestOutcomeLabel:
    def test_exactly_three_variants(self):
        assert len(OutcomeLabel) == 3

    def test_wire_codes_bijection(self):
        assert {label.value for label in OutcomeLabel} == {"A", "B", "C"}
        for label in OutcomeLabel:
            assert OutcomeLabel.from_code(label.value) is label

    def test_unknown_code_rejected(self):
        with pytest.raises(ValueError):
            OutcomeLabel.from_code("D")
