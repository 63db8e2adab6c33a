//! Accuracy and Cohen's kappa for a five-class confusion matrix of tweet
//! topics, printed as a classifier-style table.

use streamprep::classify::EvaluationReport;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let labels = ["Business", "Politics", "Technology", "lifestyle", "art"]
        .map(String::from)
        .to_vec();
    let confusion = vec![
        vec![14, 3, 2, 0, 2],
        vec![2, 10, 1, 1, 1],
        vec![4, 2, 8, 3, 2],
        vec![2, 3, 3, 12, 8],
        vec![4, 1, 0, 0, 12],
    ];
    let report = EvaluationReport::from_confusion(labels, confusion)?;
    print!("{}", report);
    println!("kappa exactly {:.17} (363/803)", report.kappa);
    Ok(())
}
