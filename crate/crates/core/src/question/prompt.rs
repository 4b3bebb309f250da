use super::{MCQItem, QuestionError};

pub const ANSWER_INSTRUCTION: &str = "Answer with the option's letter from the given choices directly.";

/// `A`, `B`, ... for option `index`; `None` past `Z`.
pub fn option_letter(index: usize) -> Option<char> {
    (index < 26).then(|| (b'A' + index as u8) as char)
}

/// Question, lettered options, then the answer instruction, one per line.
pub fn render_prompt(item: &MCQItem) -> Result<String, QuestionError> {
    render_prompt_parts(&item.question, &item.options)
}

pub fn render_prompt_parts(question: &str, options: &[String]) -> Result<String, QuestionError> {
    if options.len() > 26 {
        return Err(QuestionError::TooManyOptions(options.len()));
    }
    let mut out = String::with_capacity(question.len() + 64 * options.len());
    out.push_str(question);
    out.push('\n');
    for (i, option) in options.iter().enumerate() {
        out.push(option_letter(i).expect("checked above"));
        out.push_str(". ");
        out.push_str(option);
        out.push('\n');
    }
    out.push_str(ANSWER_INSTRUCTION);
    Ok(out)
}
