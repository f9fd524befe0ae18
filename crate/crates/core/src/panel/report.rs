use std::fmt;

/// Per-file row counts and warnings collected while loading.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileReport {
    pub file: String,
    pub rows_read: usize,
    pub rows_loaded: usize,
    pub rows_dropped: usize,
    pub warnings: Vec<String>,
}

impl FileReport {
    pub fn new(file: impl Into<String>) -> Self {
        FileReport {
            file: file.into(),
            ..Default::default()
        }
    }

    pub(crate) fn drop_row(&mut self, line: u64, why: &str) {
        self.rows_dropped += 1;
        // keep the report readable on large files
        if self.warnings.len() < 20 {
            self.warnings.push(format!("line {line}: dropped ({why})"));
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub files: Vec<FileReport>,
}

impl LoadReport {
    pub fn push(&mut self, file: FileReport) {
        self.files.push(file);
    }

    pub fn total_dropped(&self) -> usize {
        self.files.iter().map(|f| f.rows_dropped).sum()
    }

    pub fn file(&self, name: &str) -> Option<&FileReport> {
        self.files.iter().find(|f| f.file == name)
    }
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for file in &self.files {
            writeln!(
                f,
                "{}: read {} loaded {} dropped {}",
                file.file, file.rows_read, file.rows_loaded, file.rows_dropped
            )?;
            for w in &file.warnings {
                writeln!(f, "  warning: {w}")?;
            }
        }
        Ok(())
    }
}
