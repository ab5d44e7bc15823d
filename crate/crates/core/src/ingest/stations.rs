use std::io::{Read, Write};
use std::path::Path;

use super::IngestError;
use crate::model::Station;

/// Reads `id,name,longitude,latitude,capacity,tag` rows; ids must run 0..n in order.
pub fn read_stations<R: Read>(reader: R) -> Result<Vec<Station>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::MalformedStations(e.to_string()))?
        .clone();
    let expected = ["id", "name", "longitude", "latitude", "capacity", "tag"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(IngestError::MalformedStations(format!(
            "header must be {}",
            expected.join(",")
        )));
    }
    let mut stations = Vec::new();
    for (i, row) in rdr.deserialize::<Station>().enumerate() {
        let s = row.map_err(|e| IngestError::MalformedStations(e.to_string()))?;
        if s.id.0 != i {
            return Err(IngestError::MalformedStations(format!(
                "row {i} has id {}; ids must be consecutive from 0",
                s.id
            )));
        }
        s.validate()?;
        stations.push(s);
    }
    if stations.is_empty() {
        return Err(IngestError::MalformedStations("no stations".into()));
    }
    Ok(stations)
}

pub fn write_stations<W: Write>(stations: &[Station], writer: W) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for s in stations {
        w.serialize(s)
            .map_err(|e| IngestError::MalformedStations(e.to_string()))?;
    }
    w.flush()
        .map_err(|e| IngestError::MalformedStations(e.to_string()))
}

pub fn load_stations(path: impl AsRef<Path>) -> Result<Vec<Station>, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_stations(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{StationId, StationTag};

    const SAMPLE: &str = "id,name,longitude,latitude,capacity,tag
0,Roppongi First Building,139.741476,35.66241,20,regular
1,Kamiyacho,139.7449,35.6628,15,metro
2,Keio Mita,139.7440,35.6490,12,school
";

    #[test]
    fn parses_tags_and_ids() {
        let s = read_stations(SAMPLE.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].id, StationId(0));
        assert_eq!(s[1].tag, StationTag::Metro);
        assert_eq!(s[2].tag, StationTag::SchoolCompany);
        let mut buf = Vec::new();
        write_stations(&s, &mut buf).unwrap();
        assert_eq!(read_stations(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_rows() {
        let bad_tag = SAMPLE.replace("metro", "tram");
        assert!(read_stations(bad_tag.as_bytes()).is_err());
        let zero_cap = SAMPLE.replace(",15,", ",0,");
        assert!(read_stations(zero_cap.as_bytes()).is_err());
        let gap = SAMPLE.replace("\n2,", "\n5,");
        assert!(read_stations(gap.as_bytes()).is_err());
        let bad_header = SAMPLE.replace("capacity", "racks");
        assert!(read_stations(bad_header.as_bytes()).is_err());
        assert!(read_stations("".as_bytes()).is_err());
    }
}
