// Stimulus sentences come from a plain text file, one per line. The set
// is lowercase by construction and never empty.

export function parseStimulusSet(text: string): string[] {
  const sentences = text
    .split(/\r?\n/)
    .map((line) => line.trim().toLowerCase())
    .filter((line) => line.length > 0);
  if (sentences.length === 0) {
    throw new Error("stimulus file contains no sentences");
  }
  return sentences;
}

export function pickStimulus(sentences: string[], random: () => number = Math.random): string {
  return sentences[Math.floor(random() * sentences.length)];
}
