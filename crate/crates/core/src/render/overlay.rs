use super::svg::{num, Anchor, Svg};
use super::RenderError;
use crate::ingest::GroupId;
use crate::metrics::{CaseRank, PopRank};

/// `(position, pop_rank, case_rank)` per municipality, ordered by
/// population rank for `group`. `day` is 1-based.
pub fn overlay_points(
    pop_rank: &PopRank,
    case_rank: &CaseRank,
    day: usize,
    group: GroupId,
) -> Result<Vec<(usize, u32, u32)>, RenderError> {
    if day == 0 || day > case_rank.n_days() {
        return Err(RenderError::DayOutOfRange {
            day,
            n_days: case_rank.n_days(),
        });
    }
    let k = group.index();
    Ok(pop_rank
        .order(k)
        .into_iter()
        .enumerate()
        .map(|(pos, i)| (pos + 1, pop_rank.get(i, k), case_rank.get(i, day - 1, k)))
        .collect())
}

/// Population-rank line with the day's case ranks scattered over it.
pub fn render_rank_overlay(
    pop_rank: &PopRank,
    case_rank: &CaseRank,
    day: usize,
    group: GroupId,
) -> Result<String, RenderError> {
    let points = overlay_points(pop_rank, case_rank, day, group)?;
    let m = points.len().max(1) as f64;
    let (w, h) = (720.0, 520.0);
    let (left, top, pw, ph) = (70.0, 50.0, 610.0, 400.0);
    let sx = |x: f64| left + if m > 1.0 { (x - 1.0) / (m - 1.0) * pw } else { pw / 2.0 };
    let sy = |r: f64| top + ph - if m > 1.0 { (r - 1.0) / (m - 1.0) * ph } else { ph / 2.0 };

    let mut svg = Svg::new(w, h);
    svg.title(&format!("{} rank overlay, day {day}", group.label()));
    svg.text(w / 2.0, 30.0, 16.0, Anchor::Middle, true, &format!(
        "Population rank vs case rank, {} (day {day})",
        group.display_name()
    ));
    svg.rect(left, top, pw, ph, "#fcfcfc", Some("#cccccc"));
    let line: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, p, _)| (sx(x as f64), sy(p as f64)))
        .collect();
    svg.polyline(&line, "#1f77b4", 2.0);
    for &(x, _, c) in &points {
        svg.circle(sx(x as f64), sy(c as f64), 3.0, "#ff7f0e");
    }
    svg.text(left + pw / 2.0, top + ph + 36.0, 12.0, Anchor::Middle, false, "municipalities ordered by group population");
    svg.text(left - 8.0, top + ph + 4.0, 10.0, Anchor::End, false, "1");
    svg.text(left - 8.0, top + 4.0, 10.0, Anchor::End, false, &num(m, 0));
    svg.text(left, top + ph + 16.0, 10.0, Anchor::Middle, false, "1");
    svg.text(left + pw, top + ph + 16.0, 10.0, Anchor::Middle, false, &num(m, 0));
    svg.rect(left + 10.0, top + 10.0, 12.0, 3.0, "#1f77b4", None);
    svg.text(left + 28.0, top + 15.0, 11.0, Anchor::Start, false, "population rank");
    svg.circle(left + 16.0, top + 28.0, 3.0, "#ff7f0e");
    svg.text(left + 28.0, top + 32.0, 11.0, Anchor::Start, false, "case rank");
    Ok(svg.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{test_municipality, CaseCube, DateAxis, PopulationTable, K};
    use crate::metrics::{rank_cases, rank_population, RankBasis};
    use chrono::NaiveDate;

    fn ranks(pops: &[u64], day: &[u64]) -> (PopRank, CaseRank) {
        let roster: Vec<_> = (0..pops.len()).map(|i| test_municipality(&format!("m{i}"))).collect();
        let table = PopulationTable::new(pops.iter().map(|&p| [p; K]).collect());
        let axis = DateAxis::new(NaiveDate::from_ymd_opt(2020, 10, 1).unwrap(), 1).unwrap();
        let cube = CaseCube::from_fn(axis, roster.clone(), |i, _, _| day[i]).unwrap();
        (rank_population(&table, &roster), rank_cases(&cube, RankBasis::Raw))
    }

    #[test]
    fn identity_day_lies_on_line() {
        let (pr, cr) = ranks(&[30, 20, 10], &[9, 5, 1]);
        let pts = overlay_points(&pr, &cr, 1, GroupId::Baa).unwrap();
        assert!(pts.iter().all(|&(x, p, c)| x as u32 == p && p == c));
    }

    #[test]
    fn swapped_pair_leaves_line() {
        let (pr, cr) = ranks(&[30, 20, 10], &[9, 1, 5]);
        let pts = overlay_points(&pr, &cr, 1, GroupId::Hl).unwrap();
        let off: Vec<_> = pts.iter().filter(|&&(_, p, c)| p != c).collect();
        assert_eq!(off.len(), 2);
        let svg = render_rank_overlay(&pr, &cr, 1, GroupId::Hl).unwrap();
        assert_eq!(svg.matches("<circle").count(), 3 + 1);
    }

    #[test]
    fn day_must_exist() {
        let (pr, cr) = ranks(&[1, 2], &[0, 0]);
        assert!(render_rank_overlay(&pr, &cr, 2, GroupId::W).is_err());
        assert!(render_rank_overlay(&pr, &cr, 0, GroupId::W).is_err());
    }
}
