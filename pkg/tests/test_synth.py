import numpy as np

from wikiguard.synth import generate_events


class TestGenerator:
    def test_deterministic(self):
        a = generate_events(100, seed=5)
        b = generate_events(100, seed=5)
        assert [e.to_record() for e in a] == [e.to_record() for e in b]

    def test_seeds_differ(self):
        a = generate_events(100, seed=1)
        b = generate_events(100, seed=2)
        assert [e.to_record() for e in a] != [e.to_record() for e in b]

    def test_timestamps_strictly_increasing(self):
        events = generate_events(200, seed=3)
        epochs = [e.epoch for e in events]
        assert all(a < b for a, b in zip(epochs, epochs[1:]))

    def test_validates_event_schema(self):
        # construction goes through the WikiEvent validators; spot check sums
        for event in generate_events(50, seed=7):
            assert abs(sum(event.article_quality.values()) - 1.0) < 1e-6
            assert event.label in (0, 1)

    def test_roughly_balanced(self):
        events = generate_events(2000, seed=9)
        positives = sum(e.label for e in events)
        assert 0.4 < positives / len(events) < 0.6

    def test_planted_signal_present(self):
        events = generate_events(1500, seed=11, label_noise=0.0)
        length = {0: [], 1: []}
        stub = {0: [], 1: []}
        for event in events:
            length[event.label].append(len(event.content))
            stub[event.label].append(event.article_quality["wp10stub"])
        assert np.mean(length[1]) > 1.5 * np.mean(length[0])
        assert np.mean(stub[1]) > np.mean(stub[0]) + 0.2
