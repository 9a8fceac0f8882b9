def main():
    value = int(input("Enter a number: "))
    if value > 10:
        print("big")
    elif value > 5:
        print("medium")
    else:
        print("small")

main()
