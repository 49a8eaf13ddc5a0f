//! Season file URLs and the optional downloader (`fetch` feature).

use super::DataError;

pub const DEFAULT_URL_TEMPLATE: &str = "https://www.football-data.co.uk/mmz4281/{code}/{division}.csv";

/// `"2012-13"` or `"2012-2013"` to the publisher's `"1213"`.
pub fn season_code(season: &str) -> Option<String> {
    let (start, end) = season.split_once(['-', '/'])?;
    let start: u32 = start.trim().parse().ok()?;
    let end: u32 = end.trim().parse().ok()?;
    let (a, b) = (start % 100, end % 100);
    ((a + 1) % 100 == b).then(|| format!("{a:02}{b:02}"))
}

/// Fills `{season}`, `{code}` and `{division}` in `template`.
pub fn expand_url_template(template: &str, season: &str, division: &str) -> Result<String, DataError> {
    let code = season_code(season).ok_or_else(|| DataError::Fetch(format!("cannot read season label `{season}`")))?;
    Ok(template
        .replace("{season}", season)
        .replace("{code}", &code)
        .replace("{division}", division))
}

/// Downloads each (season, division) file into `dest` and writes
/// `dest/manifest.txt` listing them. Returns the manifest path.
#[cfg(feature = "fetch")]
pub fn fetch_seasons(
    template: &str,
    seasons: &[String],
    divisions: &[String],
    dest: &std::path::Path,
) -> Result<std::path::PathBuf, DataError> {
    use std::fmt::Write as _;

    let io = |path: &std::path::Path| {
        let path = path.to_path_buf();
        move |source| DataError::Io { path, source }
    };
    std::fs::create_dir_all(dest).map_err(io(dest))?;
    let mut manifest = String::new();
    for season in seasons {
        for division in divisions {
            let url = expand_url_template(template, season, division)?;
            let body = reqwest::blocking::get(&url)
                .and_then(|r| r.error_for_status())
                .and_then(|r| r.bytes())
                .map_err(|e| DataError::Fetch(format!("{url}: {e}")))?;
            let name = format!("{season}_{division}.csv");
            let path = dest.join(&name);
            std::fs::write(&path, &body).map_err(io(&path))?;
            let _ = writeln!(manifest, "{name} {season}");
        }
    }
    let path = dest.join("manifest.txt");
    std::fs::write(&path, manifest).map_err(io(&path))?;
    Ok(path)
}
