use super::*;
use crate::corpus::TimeWindow;
use crate::geo::haversine;
use crate::testutil::TestCity;

const DAY: i64 = 86_400;

fn cfg(hotspots: &[&str]) -> EventConfig {
    let event = TimeWindow::new(91 * DAY, 112 * DAY).unwrap();
    EventConfig::new(event, hotspots.iter().map(|s| s.to_string()).collect())
}

fn base_city() -> TestCity {
    TestCity::new()
        .named_venue("hot1", "Hyde Park Live Site 2012", "General Entertainment", 0.0, 0.0)
        .named_venue("hot2", "Olympic Broadcast Compound", "General Entertainment", 3000.0, 0.0)
        .named_venue("hot3", "Greenwich Live Site 2012", "General Entertainment", 0.0, -2500.0)
        .venue("stadium", "Stadium", 800.0, 0.0)
        .named_venue("mcd", "McDonald's Olympic Park", "Fast Food Restaurant", 400.0, 400.0)
        .venue("cafe", "Coffee Shop", 500.0, 0.0)
}

#[test]
fn hotspot_distance_zero_at_hotspot() {
    let c = base_city().build();
    let e = FeatureEngine::new(&c, cfg(&["hot1", "hot2", "hot3"])).unwrap();
    assert_eq!(e.olympic_distance(c.venue_index("hot2").unwrap()).unwrap(), 0.0);
}

#[test]
fn hotspot_distance_single_and_multiple_candidates() {
    let c = base_city().build();
    let cafe = c.venue_index("cafe").unwrap();
    let e = FeatureEngine::new(&c, cfg(&["hot2"])).unwrap();
    let want = haversine(c.location(cafe), c.location(c.venue_index("hot2").unwrap()));
    assert_eq!(e.olympic_distance(cafe).unwrap(), want);

    let e = FeatureEngine::new(&c, cfg(&["hot1", "hot2", "hot3"])).unwrap();
    let min = ["hot1", "hot2", "hot3"]
        .iter()
        .map(|h| haversine(c.location(cafe), c.location(c.venue_index(h).unwrap())))
        .fold(f64::INFINITY, f64::min);
    assert_eq!(e.olympic_distance(cafe).unwrap(), min);
    assert!((min - 500.0).abs() < 1.0);
}

#[test]
fn missing_hotspots_and_stadiums_are_errors() {
    let c = base_city().build();
    let e = FeatureEngine::new(&c, cfg(&[])).unwrap();
    let cafe = c.venue_index("cafe").unwrap();
    assert!(matches!(e.olympic_distance(cafe), Err(FeatureError::NoHotspots)));
    assert!(matches!(FeatureEngine::new(&c, cfg(&["nope"])), Err(FeatureError::Corpus(_))));

    let no_stadium =
        TestCity::new().venue("h", "General Entertainment", 0.0, 0.0).venue("a", "Coffee Shop", 10.0, 0.0).build();
    let e = FeatureEngine::new(&no_stadium, cfg(&["h"])).unwrap();
    let a = no_stadium.venue_index("a").unwrap();
    assert!(matches!(e.stadium_distance(a), Err(FeatureError::NoStadiums)));
    assert_eq!(e.sponsor_distance(a), None);
    let err = e.feature_matrix(&[a]).unwrap_err();
    assert!(err.to_string().contains("\"a\""), "{err}");
}

#[test]
fn stadium_and_sponsor_distances() {
    let c = base_city().venue("stadium2", "Track Stadium", 500.0, 300.0).build();
    let e = FeatureEngine::new(&c, cfg(&["hot1"])).unwrap();
    let st = c.venue_index("stadium").unwrap();
    assert_eq!(e.stadium_distance(st).unwrap(), 0.0);
    let cafe = c.venue_index("cafe").unwrap();
    let (a, b) = (
        haversine(c.location(cafe), c.location(st)),
        haversine(c.location(cafe), c.location(c.venue_index("stadium2").unwrap())),
    );
    assert_eq!(e.stadium_distance(cafe).unwrap(), a.min(b));

    let mcd = c.venue_index("mcd").unwrap();
    assert_eq!(e.sponsor_distance(mcd), Some(0.0));
    let want = haversine(c.location(cafe), c.location(mcd));
    assert_eq!(e.sponsor_distance(cafe), Some(want));
}

#[test]
fn explicit_stadium_types_restrict_candidates() {
    let c = base_city().venue("track", "Track Stadium", 510.0, 0.0).build();
    let mut config = cfg(&["hot1"]);
    config.stadium_types = ["Stadium".to_string()].into_iter().collect();
    let e = FeatureEngine::new(&c, config).unwrap();
    assert_eq!(e.stadiums(), &[c.venue_index("stadium").unwrap()]);
}

#[test]
fn entropy_examples() {
    // one type only
    let c = TestCity::new()
        .venue("h", "Stadium", 0.0, 0.0)
        .venue("a", "Coffee Shop", 5000.0, 0.0)
        .venue("b", "Coffee Shop", 5050.0, 0.0)
        .build();
    let e = FeatureEngine::new(&c, cfg(&["h"])).unwrap();
    assert_eq!(e.nearby_place_entropy(c.venue_index("a").unwrap()), 0.0);

    // two types, equal counts
    let c = TestCity::new().venue("h", "Stadium", 0.0, 0.0).venue("a", "Coffee Shop", 50.0, 0.0).build();
    let e = FeatureEngine::new(&c, cfg(&["h"])).unwrap();
    assert!((e.nearby_place_entropy(c.venue_index("a").unwrap()) - std::f64::consts::LN_2).abs() < 1e-12);

    // counts (2, 1, 1): -(0.5 ln 0.5 + 2 * 0.25 ln 0.25) = 1.5 ln 2
    let c = TestCity::new()
        .venue("h", "Stadium", 0.0, 0.0)
        .venue("a", "Coffee Shop", 50.0, 0.0)
        .venue("b", "Coffee Shop", 0.0, 50.0)
        .venue("p", "Park", -50.0, 0.0)
        .build();
    let e = FeatureEngine::new(&c, cfg(&["h"])).unwrap();
    let h = e.nearby_place_entropy(c.venue_index("h").unwrap());
    assert!((h - 1.5 * std::f64::consts::LN_2).abs() < 1e-12);
    assert!((h - 1.0397).abs() < 1e-4);
}

#[test]
fn jensen_coefficient_examples() {
    // Coffee Shops cluster together, the Bookstore sits alone far away.
    let c = TestCity::new()
        .venue("h", "Stadium", 0.0, 0.0)
        .venue("c1", "Coffee Shop", 5000.0, 0.0)
        .venue("c2", "Coffee Shop", 5050.0, 0.0)
        .venue("pk", "Park", 5000.0, 60.0)
        .venue("bk", "Bookstore", 9000.0, 0.0)
        .build();
    let e = FeatureEngine::new(&c, cfg(&["h"])).unwrap();
    assert_eq!(e.jensen_coefficient("Coffee Shop", "Bookstore").unwrap(), Some(0.0));
    assert_eq!(e.jensen_coefficient("Italian Restaurant", "Coffee Shop").unwrap(), None);
    assert!(matches!(e.jensen_coefficient("Zoo", "Coffee Shop"), Err(FeatureError::UnknownType(_))));

    // hand evaluation: N = 5, N_coffee = 2, N_park = 1.
    // c1: N = 3 (c1, c2, pk), N_coffee = 2 -> N_park/(3-2) = 1; same for c2.
    // k = (5 - 2) / (2 * 1) * 2 = 3
    assert_eq!(e.jensen_coefficient("Coffee Shop", "Park").unwrap(), Some(3.0));
    // park -> coffee: pk sees c1, c2 and itself: N_coffee / (3 - 1) = 1; k = (5-1)/(1*2) * 1 = 2
    assert_eq!(e.jensen_coefficient("Park", "Coffee Shop").unwrap(), Some(2.0));
}

#[test]
fn jensen_quality_lone_type_is_zero() {
    let c = TestCity::new()
        .venue("h", "Stadium", 0.0, 0.0)
        .venue("c1", "Coffee Shop", 50.0, 0.0)
        .venue("it", "Italian Restaurant", 0.0, 50.0)
        .venue("pk", "Park", 5000.0, 0.0)
        .build();
    let e = FeatureEngine::new(&c, cfg(&["h"])).unwrap();
    assert_eq!(e.jensen_quality(c.venue_index("it").unwrap()), 0.0);
}

#[test]
fn jensen_quality_single_term() {
    // Two parks; one has a coffee shop nearby, the other does not.
    // For t_v = Park: mean N_coffee around parks = 0.5, mean N_park = 1.
    // k(Coffee -> Park): c1 sees {c1, p1}: N_park/(2-1) = 1; k = (3-1)/(1*2) * 1 = 1.
    // k(Park -> Park): p1 sees {p1, c1}: 1/(2-1) = 1, p2 sees {p2}: denominator 0, skipped;
    // k = (3-2)/(2*2) * 1 = 0.25, deviation (1 - 1) = 0.
    // quality(p1) = 1 * (1 - 0.5) + 0.25 * 0 = 0.5; quality(p2) = -0.5.
    let c = TestCity::new()
        .venue("p1", "Park", 0.0, 0.0)
        .venue("c1", "Coffee Shop", 50.0, 0.0)
        .venue("p2", "Park", 5000.0, 0.0)
        .build();
    let e = FeatureEngine::new(&c, cfg(&["p1"])).unwrap();
    assert_eq!(e.jensen_coefficient("Coffee Shop", "Park").unwrap(), Some(1.0));
    assert_eq!(e.jensen_coefficient("Park", "Park").unwrap(), Some(0.25));
    assert_eq!(e.jensen_quality(c.venue_index("p1").unwrap()), 0.5);
    assert_eq!(e.jensen_quality(c.venue_index("p2").unwrap()), -0.5);
}

#[test]
fn popularity_counts_pre_window_only() {
    let config = cfg(&["h"]);
    let (pre_start, pre_end) = (config.pre_window.start(), config.pre_window.end());
    let c = TestCity::new()
        .venue("h", "Stadium", 0.0, 0.0)
        .venue("a", "Coffee Shop", 50.0, 0.0)
        .checkin("u", "a", pre_start)
        .checkin("u", "a", pre_start + 10)
        .checkin("w", "a", pre_end - 1)
        .checkin("w", "a", pre_end)
        .checkin("w", "a", pre_start - 1)
        .build();
    let e = FeatureEngine::new(&c, config).unwrap();
    assert_eq!(e.popularity(c.venue_index("a").unwrap()), 3);
    assert_eq!(e.popularity(c.venue_index("h").unwrap()), 0);
}

#[test]
fn entertainment_flow_examples() {
    let config = cfg(&["h"]);
    let t0 = config.pre_window.start();
    let city = || {
        TestCity::new()
            .venue("h", "Stadium", 5000.0, 0.0)
            .venue("v", "Coffee Shop", 0.0, 0.0)
            .venue("n", "Italian Restaurant", 100.0, 0.0)
            .venue("far", "Train Station", 3000.0, 0.0)
    };
    let c = city().build();
    let e = FeatureEngine::new(&c, config.clone()).unwrap();
    assert_eq!(e.entertainment_flow(c.venue_index("v").unwrap()), 0.0);

    // n <-> stadium once, n <-> station once: fraction(n) = 0.5, fraction(v) = 0
    let c = city()
        .checkin("u1", "h", t0)
        .checkin("u1", "n", t0 + 3600)
        .checkin("u2", "far", t0)
        .checkin("u2", "n", t0 + 3600)
        .build();
    let e = FeatureEngine::new(&c, config).unwrap();
    assert_eq!(e.entertainment_flow(c.venue_index("v").unwrap()), 0.25);
}

#[test]
fn social_area_examples() {
    let config = cfg(&["h"]);
    let t0 = config.pre_window.start();
    let city = || {
        TestCity::new()
            .venue("h", "Stadium", 5000.0, 0.0)
            .venue("v", "Coffee Shop", 0.0, 0.0)
            .venue("n", "Park", 100.0, 0.0)
            .checkin("a", "v", t0)
            .checkin("b", "n", t0)
            .checkin("c", "n", t0 + 5)
            .checkin("d", "h", t0)
    };
    let c = city().build();
    let e = FeatureEngine::new(&c, config.clone()).unwrap();
    assert_eq!(e.social_area(c.venue_index("v").unwrap()), 0);

    let c = city().friends("a", "b").friends("b", "c").friends("a", "c").friends("a", "d").build();
    let e = FeatureEngine::new(&c, config).unwrap();
    assert_eq!(e.social_area(c.venue_index("v").unwrap()), 3);
    assert_eq!(e.social_area(c.venue_index("h").unwrap()), 0);
}

#[test]
fn feature_matrix_shapes() {
    let c = base_city().build();
    let e = FeatureEngine::new(&c, cfg(&["hot1"])).unwrap();
    assert!(e.feature_matrix(&[]).unwrap().rows.is_empty());
    let cafe = c.venue_index("cafe").unwrap();
    let m = e.feature_matrix(&[cafe]).unwrap();
    assert_eq!(m.rows.len(), 1);
    assert!(m.absent.is_empty());
    let mut all: Vec<_> = c.venue_indices().collect();
    all.reverse();
    let m = e.feature_matrix(&all).unwrap();
    let ids: Vec<_> = m.rows.iter().map(|r| r.venue_id.clone()).collect();
    let want: Vec<_> = all.iter().map(|&v| c.venue(v).id.clone()).collect();
    assert_eq!(ids, want);
    assert!(m.rows.iter().all(|r| Feature::ALL.iter().all(|&f| r.get(f).is_some_and(f64::is_finite))));
}

#[test]
fn absent_sponsor_is_reported() {
    let c = TestCity::new().venue("h", "Stadium", 0.0, 0.0).venue("a", "Coffee Shop", 10.0, 0.0).build();
    let e = FeatureEngine::new(&c, cfg(&["h"])).unwrap();
    let m = e.feature_matrix(&[c.venue_index("a").unwrap()]).unwrap();
    assert_eq!(m.absent, vec![Feature::SponsorDistance]);
}

#[test]
fn rejects_windows_overlapping_the_event() {
    let c = base_city().build();
    let mut config = cfg(&["hot1"]);
    config.pre_window = TimeWindow::new(config.event_window.start(), config.event_window.end()).unwrap();
    assert!(matches!(FeatureEngine::new(&c, config), Err(FeatureError::InvalidConfig(_))));
    let mut config = cfg(&["hot1"]);
    config.radius_m = 0.0;
    assert!(FeatureEngine::new(&c, config).is_err());
}
