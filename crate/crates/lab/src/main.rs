use fraisse_lab::commands::{run, StdoutPayload};

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let output = run(&argv);
    match output.stdout {
        StdoutPayload::Json(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("reports serialise"));
        }
        StdoutPayload::Text(text) => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
        }
    }
    std::process::exit(output.exit);
}
